// Controller-section editor: numeric fields only, no drag interactions.
import { Section } from "./types.js";

export const SECTION_DEFAULTS: Record<string, Section> = {
  gain: { type: "gain", db: 0 },
  real_zero: { type: "real_zero", position: 0.5 },
  real_pole: { type: "real_pole", position: 0.5 },
  notch: { type: "notch", K: 0.75, alpha1: 0.52, alpha2: 0.76 },
};

export function describeSection(s: Section): string {
  switch (s.type) {
    case "gain":
      return `gain ${s.db.toFixed(2)} dB`;
    case "real_zero":
      return `zero at ${s.position}`;
    case "real_pole":
      return `pole at ${s.position}`;
    case "notch":
      return `notch K=${s.K} a1=${s.alpha1} a2=${s.alpha2}`;
  }
}

export function sectionFields(s: Section): Array<{ key: string; value: number }> {
  return Object.entries(s)
    .filter(([k]) => k !== "type")
    .map(([key, value]) => ({ key, value: value as number }));
}

export function updateSection(s: Section, key: string, value: number): Section {
  return { ...s, [key]: value } as Section;
}
