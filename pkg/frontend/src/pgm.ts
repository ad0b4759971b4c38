// Decoding of the map payloads the service sends: binary P5 PGM in base64
// plus a small key/value metadata block.

export interface DecodedMap {
  width: number;
  height: number;
  resolution: number;
  // gray levels in PGM row order (top row first)
  pixels: Uint8Array;
}

export const PGM_OCCUPIED = 0;
export const PGM_FREE = 254;

function base64ToBytes(b64: string): Uint8Array {
  if (typeof atob === "function") {
    const raw = atob(b64);
    const out = new Uint8Array(raw.length);
    for (let i = 0; i < raw.length; i++) out[i] = raw.charCodeAt(i);
    return out;
  }
  return new Uint8Array(Buffer.from(b64, "base64"));
}

export function decodePgm(b64: string, meta: string): DecodedMap {
  const bytes = base64ToBytes(b64);
  // header: "P5\n<w> <h>\n255\n" followed by raw payload
  let pos = 0;
  const tokens: string[] = [];
  while (tokens.length < 4 && pos < bytes.length) {
    while (pos < bytes.length && [32, 9, 13, 10].includes(bytes[pos])) pos++;
    if (bytes[pos] === 35) { // '#' comment line
      while (pos < bytes.length && bytes[pos] !== 10) pos++;
      continue;
    }
    let start = pos;
    while (pos < bytes.length && ![32, 9, 13, 10].includes(bytes[pos])) pos++;
    tokens.push(String.fromCharCode(...bytes.slice(start, pos)));
  }
  pos++; // single whitespace after maxval
  const [magic, w, h, maxval] = tokens;
  if (magic !== "P5" || maxval !== "255") {
    throw new Error(`unsupported map payload (${magic}, maxval ${maxval})`);
  }
  const width = parseInt(w, 10);
  const height = parseInt(h, 10);
  const pixels = bytes.slice(pos, pos + width * height);
  if (pixels.length !== width * height) {
    throw new Error("truncated map payload");
  }
  let resolution = 0.05;
  for (const line of meta.split("\n")) {
    const m = line.match(/^resolution:\s*([0-9.eE+-]+)/);
    if (m) resolution = parseFloat(m[1]);
  }
  return { width, height, resolution, pixels };
}
