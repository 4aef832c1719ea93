// Minimal protobuf wire-format writer. Only what serializing an ONNX
// model needs: varints, length-delimited fields, and message nesting.

export function varint(value: number | bigint): Buffer {
  let v = BigInt(value);
  if (v < 0n) throw new RangeError("varint value must be non-negative");
  const bytes: number[] = [];
  do {
    let b = Number(v & 0x7fn);
    v >>= 7n;
    if (v > 0n) b |= 0x80;
    bytes.push(b);
  } while (v > 0n);
  return Buffer.from(bytes);
}

function tag(field: number, wireType: number): Buffer {
  return varint((field << 3) | wireType);
}

export function varintField(field: number, value: number | bigint): Buffer {
  return Buffer.concat([tag(field, 0), varint(value)]);
}

export function bytesField(field: number, payload: Buffer): Buffer {
  return Buffer.concat([tag(field, 2), varint(payload.length), payload]);
}

export function stringField(field: number, text: string): Buffer {
  return bytesField(field, Buffer.from(text, "utf8"));
}

export function packedVarints(field: number, values: readonly number[]): Buffer {
  return bytesField(field, Buffer.concat(values.map(varint)));
}

export function message(...parts: Buffer[]): Buffer {
  return Buffer.concat(parts);
}
