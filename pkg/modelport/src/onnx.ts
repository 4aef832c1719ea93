// ONNX graph serialization on top of the raw protobuf writer. Field
// numbers follow onnx.proto3; only the subset used by small feed-forward
// embedding graphs is implemented.

import { bytesField, message, packedVarints, stringField, varintField } from "./proto.js";

export const FLOAT = 1; // TensorProto.DataType
const ATTR_INT = 2; // AttributeProto.AttributeType
const ATTR_INTS = 7;

export interface Attribute {
  name: string;
  kind: "int" | "ints";
  value: number | readonly number[];
}

export function attrInt(name: string, value: number): Attribute {
  return { name, kind: "int", value };
}

export function attrInts(name: string, value: readonly number[]): Attribute {
  return { name, kind: "ints", value };
}

export interface GraphNode {
  opType: string;
  name: string;
  inputs: readonly string[];
  outputs: readonly string[];
  attributes?: readonly Attribute[];
}

export interface FloatTensor {
  name: string;
  dims: readonly number[];
  data: Float32Array;
}

export interface ValueInfo {
  name: string;
  dims: readonly number[];
}

export interface GraphSpec {
  name: string;
  nodes: readonly GraphNode[];
  initializers: readonly FloatTensor[];
  inputs: readonly ValueInfo[];
  outputs: readonly ValueInfo[];
}

function encodeAttribute(attr: Attribute): Buffer {
  const parts = [stringField(1, attr.name)];
  if (attr.kind === "int") {
    parts.push(varintField(3, attr.value as number));
    parts.push(varintField(20, ATTR_INT));
  } else {
    parts.push(packedVarints(8, attr.value as readonly number[]));
    parts.push(varintField(20, ATTR_INTS));
  }
  return message(...parts);
}

function encodeNode(node: GraphNode): Buffer {
  return message(
    ...node.inputs.map((name) => stringField(1, name)),
    ...node.outputs.map((name) => stringField(2, name)),
    stringField(3, node.name),
    stringField(4, node.opType),
    ...(node.attributes ?? []).map((attr) => bytesField(5, encodeAttribute(attr))),
  );
}

function encodeTensor(tensor: FloatTensor): Buffer {
  const raw = Buffer.alloc(tensor.data.length * 4);
  for (let i = 0; i < tensor.data.length; i++) {
    raw.writeFloatLE(tensor.data[i]!, i * 4);
  }
  return message(
    packedVarints(1, tensor.dims),
    varintField(2, FLOAT),
    stringField(8, tensor.name),
    bytesField(9, raw),
  );
}

function encodeValueInfo(info: ValueInfo): Buffer {
  const dims = message(...info.dims.map((d) => bytesField(1, varintField(1, d))));
  const tensorType = message(varintField(1, FLOAT), bytesField(2, dims));
  return message(stringField(1, info.name), bytesField(2, bytesField(1, tensorType)));
}

export function encodeModel(graph: GraphSpec, opset = 13): Buffer {
  const graphBody = message(
    ...graph.nodes.map((n) => bytesField(1, encodeNode(n))),
    stringField(2, graph.name),
    ...graph.initializers.map((t) => bytesField(5, encodeTensor(t))),
    ...graph.inputs.map((v) => bytesField(11, encodeValueInfo(v))),
    ...graph.outputs.map((v) => bytesField(12, encodeValueInfo(v))),
  );
  return message(
    varintField(1, 7), // ir_version
    stringField(2, "modelport"),
    bytesField(7, graphBody),
    bytesField(8, message(stringField(1, ""), varintField(2, opset))),
  );
}
