// Per-vertex quality state. Deltas from the service are applied in arrival
// order; the buffer never invents or rescales values, so after any replay
// it matches the service accumulation vector bit for bit.

import type { QualityDelta } from "./api";

export class QualityBuffer {
  readonly values: Float64Array;

  constructor(nPoints: number) {
    this.values = new Float64Array(nPoints);
  }

  applyDeltas(deltas: QualityDelta[]): number[] {
    const touched: number[] = [];
    for (const { index, quality } of deltas) {
      if (index < 0 || index >= this.values.length) {
        throw new RangeError(`delta index ${index} out of range`);
      }
      this.values[index] = quality;
      touched.push(index);
    }
    return touched;
  }

  // Websocket batches arrive as [index, quality] pairs.
  applyBatch(batch: [number, number][]): number[] {
    return this.applyDeltas(batch.map(([index, quality]) => ({ index, quality })));
  }

  reset(): void {
    this.values.fill(0);
  }

  total(): number {
    let sum = 0;
    for (const v of this.values) sum += v;
    return sum;
  }
}

// Fixed cold-to-warm colormap over quality in [0, 1]: deep blue at zero
// through green to red at one. The range never changes during a session.
export function qualityColor(q: number): [number, number, number] {
  const t = Math.min(1, Math.max(0, q));
  if (t < 0.5) {
    const s = t * 2;
    return [0, s, 1 - s];
  }
  const s = (t - 0.5) * 2;
  return [s, 1 - s, 0];
}

export function colorArray(values: ArrayLike<number>): Float32Array {
  const out = new Float32Array(values.length * 3);
  for (let i = 0; i < values.length; i++) {
    const [r, g, b] = qualityColor(values[i]);
    out[3 * i] = r;
    out[3 * i + 1] = g;
    out[3 * i + 2] = b;
  }
  return out;
}
