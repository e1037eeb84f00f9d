// Thin typed client over the service; all numbers pass through untouched.
import {
  BoundaryJson,
  ControllerResponse,
  Section,
  SimulateResponse,
} from "./types.js";

export class ServiceError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function check(resp: Response): Promise<any> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && body.detail) detail = String(body.detail);
    } catch {
      /* keep statusText */
    }
    throw new ServiceError(resp.status, detail);
  }
  return resp.json();
}

export class Client {
  constructor(
    private base: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  async postProblem(problem: unknown): Promise<string> {
    const body = await check(
      await this.fetchFn(`${this.base}/problems`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(problem),
      }),
    );
    return body.id as string;
  }

  async boundaries(id: string): Promise<BoundaryJson[]> {
    return check(await this.fetchFn(`${this.base}/problems/${id}/boundaries`));
  }

  async controller(id: string, sections: Section[]): Promise<ControllerResponse> {
    return check(
      await this.fetchFn(`${this.base}/problems/${id}/controller`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ sections }),
      }),
    );
  }

  async simulate(
    id: string,
    sections: Section[],
    tEnd: number,
    reference?: unknown,
  ): Promise<SimulateResponse> {
    const payload: Record<string, unknown> = { sections, t_end: tEnd };
    if (reference !== undefined) payload.reference = reference;
    return check(
      await this.fetchFn(`${this.base}/problems/${id}/simulate`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(payload),
      }),
    );
  }
}
