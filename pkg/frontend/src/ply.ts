/**
 * PLY reader for the subset the engine writes: a single vertex
 * element with x/y/z as float or double plus an optional uchar RGB
 * triple, in binary little-endian or ascii encoding. Coordinates
 * come back as float64 regardless of the stored width.
 */

export interface ParsedCloud {
  count: number;
  points: Float64Array; // 3 per vertex
  colors: Uint8Array | null; // 3 per vertex
}

interface Header {
  format: "binary_little_endian" | "ascii";
  count: number;
  coordBytes: 4 | 8;
  hasColors: boolean;
  bodyOffset: number;
}

function headerLines(bytes: Uint8Array): { lines: string[]; offset: number } {
  // the header is ascii up to the newline after end_header
  const probe = new TextDecoder("ascii")
    .decode(bytes.subarray(0, Math.min(bytes.length, 65536)));
  const marker = probe.indexOf("end_header\n");
  if (marker < 0) throw new Error("missing end_header");
  const headerText = probe.slice(0, marker + "end_header\n".length);
  return {
    lines: headerText.split("\n").filter((ln) => ln.length > 0),
    offset: headerText.length,
  };
}

function parseHeader(bytes: Uint8Array): Header {
  const { lines, offset } = headerLines(bytes);
  if (lines[0] !== "ply") throw new Error("not a PLY file");
  let format: Header["format"] | null = null;
  let count = -1;
  const props: { type: string; name: string }[] = [];
  let inVertex = false;
  for (const line of lines.slice(1, -1)) {
    const tokens = line.trim().split(/\s+/);
    switch (tokens[0]) {
      case "comment":
        break;
      case "format":
        if (tokens[1] === "binary_little_endian") format = tokens[1];
        else if (tokens[1] === "ascii") format = tokens[1];
        else throw new Error(`unsupported format ${tokens[1]}`);
        break;
      case "element":
        if (tokens[1] !== "vertex") {
          throw new Error(`unsupported element ${tokens[1]}`);
        }
        count = Number(tokens[2]);
        if (!Number.isInteger(count) || count < 0) {
          throw new Error("bad vertex count");
        }
        inVertex = true;
        break;
      case "property":
        if (!inVertex) throw new Error("property before element");
        if (tokens[1] === "list") throw new Error("list properties unsupported");
        props.push({ type: tokens[1], name: tokens[2] });
        break;
      default:
        throw new Error(`unexpected header line: ${line}`);
    }
  }
  if (!format) throw new Error("missing format line");
  if (count < 0) throw new Error("missing vertex element");

  const names = props.map((p) => p.name);
  const coordNames = names.slice(0, 3);
  if (coordNames.join(",") !== "x,y,z") {
    throw new Error("vertex properties must start with x, y, z");
  }
  const coordTypes = new Set(props.slice(0, 3).map((p) => p.type));
  if (coordTypes.size !== 1) throw new Error("mixed coordinate types");
  const coordType = props[0].type;
  if (coordType !== "double" && coordType !== "float") {
    throw new Error(`unsupported coordinate type ${coordType}`);
  }
  const rest = props.slice(3);
  let hasColors = false;
  if (rest.length > 0) {
    const restNames = rest.map((p) => p.name).join(",");
    if (restNames !== "red,green,blue") {
      throw new Error("only a full red,green,blue block is supported");
    }
    if (rest.some((p) => p.type !== "uchar")) {
      throw new Error("colors must be uchar");
    }
    hasColors = true;
  }
  return {
    format,
    count,
    coordBytes: coordType === "double" ? 8 : 4,
    hasColors,
    bodyOffset: offset,
  };
}

export function parsePly(data: ArrayBuffer | Uint8Array): ParsedCloud {
  const bytes = data instanceof Uint8Array ? data : new Uint8Array(data);
  const header = parseHeader(bytes);
  const points = new Float64Array(header.count * 3);
  const colors = header.hasColors ? new Uint8Array(header.count * 3) : null;

  if (header.format === "binary_little_endian") {
    const stride = 3 * header.coordBytes + (header.hasColors ? 3 : 0);
    const body = bytes.subarray(header.bodyOffset);
    if (body.length < stride * header.count) {
      throw new Error("body shorter than the header promises");
    }
    const view = new DataView(body.buffer, body.byteOffset, body.byteLength);
    for (let i = 0; i < header.count; i++) {
      const base = i * stride;
      for (let c = 0; c < 3; c++) {
        points[3 * i + c] = header.coordBytes === 8
          ? view.getFloat64(base + c * 8, true)
          : view.getFloat32(base + c * 4, true);
      }
      if (colors) {
        for (let c = 0; c < 3; c++) {
          colors[3 * i + c] = view.getUint8(base + 3 * header.coordBytes + c);
        }
      }
    }
    return { count: header.count, points, colors };
  }

  const text = new TextDecoder("ascii").decode(
    bytes.subarray(header.bodyOffset));
  const rows = text.split("\n").filter((ln) => ln.trim().length > 0);
  if (rows.length < header.count) {
    throw new Error("body shorter than the header promises");
  }
  const width = 3 + (header.hasColors ? 3 : 0);
  for (let i = 0; i < header.count; i++) {
    const cells = rows[i].trim().split(/\s+/);
    if (cells.length !== width) throw new Error(`bad vertex row: ${rows[i]}`);
    for (let c = 0; c < 3; c++) {
      const v = Number(cells[c]);
      if (Number.isNaN(v)) throw new Error(`bad coordinate: ${cells[c]}`);
      points[3 * i + c] = v;
    }
    if (colors) {
      for (let c = 0; c < 3; c++) {
        const v = Number(cells[3 + c]);
        if (!Number.isInteger(v) || v < 0 || v > 255) {
          throw new Error(`bad color: ${cells[3 + c]}`);
        }
        colors[3 * i + c] = v;
      }
    }
  }
  return { count: header.count, points, colors };
}
