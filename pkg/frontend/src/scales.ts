// Affine value->pixel scales. Pure; the only place payload numbers meet pixels.

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const k = (r1 - r0) / (d1 - d0);
  const fn = ((v: number) => r0 + (v - d0) * k) as Scale;
  fn.domain = domain;
  fn.range = range;
  return fn;
}

/** Wrap a phase in degrees into [-360, 0]. */
export function wrapPhase(deg: number): number {
  let p = deg % 360;
  if (p > 0) p -= 360;
  return p;
}
