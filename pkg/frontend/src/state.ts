// Session state: one in-flight recompute at a time, latest edit wins.
import { ControllerResponse, Section } from "./types.js";

export class LatestWins<T> {
  private seq = 0;

  /** Run the async job; resolve null when a newer job superseded it. */
  async run(job: () => Promise<T>): Promise<T | null> {
    const mine = ++this.seq;
    const result = await job();
    return mine === this.seq ? result : null;
  }
}

export interface SessionState {
  problemId: string | null;
  sections: Section[];
  lastResponse: ControllerResponse | null;
}

export function initialState(): SessionState {
  return { problemId: null, sections: [], lastResponse: null };
}

export function withSection(state: SessionState, section: Section): SessionState {
  return { ...state, sections: [...state.sections, section] };
}

export function withoutSection(state: SessionState, index: number): SessionState {
  return { ...state, sections: state.sections.filter((_, i) => i !== index) };
}
