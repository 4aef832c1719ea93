// Parity fixture inputs. Images are never stored; both runtimes regrow
// them from a stream id: one draw below 256 per channel, row major, RGB.

import { stream } from "./rng.js";

export function generateInput(streamId: string, width: number, height: number): Uint8Array {
  const rng = stream(0n, streamId);
  const out = new Uint8Array(width * height * 3);
  for (let i = 0; i < out.length; i++) {
    out[i] = rng.nextBelow(256);
  }
  return out;
}
