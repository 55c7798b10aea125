/**
 * Restricted unpickler for numpy-bearing archives.
 *
 * Supports exactly what a pickled dict of numpy float arrays needs:
 * protocol 2 streams as written by legacy cPickle (dict keys and raw
 * array payloads stored as 8-bit strings) and modern protocol 3-5
 * streams (unicode keys, native bytes, framing, memoization). Anything
 * trying to construct other objects is rejected.
 */

const enum Op {
  PROTO = 0x80,
  FRAME = 0x95,
  STOP = 0x2e, // '.'
  MARK = 0x28, // '('
  EMPTY_DICT = 0x7d, // '}'
  SETITEM = 0x73, // 's'
  SETITEMS = 0x75, // 'u'
  EMPTY_LIST = 0x5d, // ']'
  APPEND = 0x61, // 'a'
  APPENDS = 0x65, // 'e'
  EMPTY_TUPLE = 0x29, // ')'
  TUPLE = 0x74, // 't'
  TUPLE1 = 0x85,
  TUPLE2 = 0x86,
  TUPLE3 = 0x87,
  NONE = 0x4e, // 'N'
  NEWTRUE = 0x88,
  NEWFALSE = 0x89,
  BININT = 0x4a, // 'J'
  BININT1 = 0x4b, // 'K'
  BININT2 = 0x4d, // 'M'
  LONG1 = 0x8a,
  BINFLOAT = 0x47, // 'G'
  SHORT_BINSTRING = 0x55, // 'U'
  BINSTRING = 0x54, // 'T'
  BINBYTES = 0x42, // 'B'
  SHORT_BINBYTES = 0x43, // 'C'
  BINBYTES8 = 0x8e,
  BINUNICODE = 0x58, // 'X'
  SHORT_BINUNICODE = 0x8c,
  BINPUT = 0x71, // 'q'
  LONG_BINPUT = 0x72, // 'r'
  BINGET = 0x68, // 'h'
  LONG_BINGET = 0x6a, // 'j'
  MEMOIZE = 0x94,
  GLOBAL = 0x63, // 'c'
  STACK_GLOBAL = 0x93,
  REDUCE = 0x52, // 'R'
  NEWOBJ = 0x81,
  BUILD = 0x62, // 'b'
}

export class PickleError extends Error {}

export interface NdArray {
  kind: 'ndarray';
  shape: number[];
  /** normalized dtype code, e.g. 'f8' or 'f4' */
  dtype: string;
  data: Float64Array | Float32Array;
}

interface GlobalRef {
  kind: 'global';
  module: string;
  name: string;
}

interface DTypeStub {
  kind: 'dtype';
  code: string;
  littleEndian: boolean;
}

interface ArrayStub {
  kind: 'array-stub';
  resolved?: NdArray;
}

/** Legacy 8-bit string: dict key when short, raw payload when large. */
class Py2String {
  constructor(readonly bytes: Uint8Array) {}
  asText(): string {
    return Buffer.from(this.bytes).toString('latin1');
  }
}

const MARK_SENTINEL = Symbol('mark');

type Value = unknown;

function isGlobal(v: Value, module: RegExp, name: string): boolean {
  const g = v as GlobalRef;
  return (
    typeof v === 'object' && v !== null && (v as GlobalRef).kind === 'global' &&
    module.test(g.module) && g.name === name
  );
}

function asBytes(v: Value): Uint8Array {
  if (v instanceof Py2String) return v.bytes;
  if (v instanceof Uint8Array) return v;
  throw new PickleError('expected a byte payload');
}

function finalizeArray(stub: ArrayStub, state: Value[]): void {
  // ndarray state: (version, shape, dtype, fortran_order, raw_data)
  if (state.length < 5) throw new PickleError('unexpected ndarray state');
  const shape = (state[1] as Value[]).map((d) => {
    if (typeof d !== 'number' || !Number.isInteger(d) || d < 0) {
      throw new PickleError('non-integer dimension in array shape');
    }
    return d;
  });
  const dtype = state[2] as DTypeStub;
  if (!dtype || dtype.kind !== 'dtype') throw new PickleError('missing dtype in array state');
  if (state[3] === true) {
    throw new PickleError('fortran-order arrays are not supported');
  }
  const raw = asBytes(state[4]);

  const count = shape.reduce((a, b) => a * b, 1);
  const itemSize = dtype.code === 'f8' ? 8 : dtype.code === 'f4' ? 4 : 0;
  if (itemSize === 0) throw new PickleError(`unsupported dtype '${dtype.code}'`);
  if (raw.byteLength !== count * itemSize) {
    throw new PickleError(
      `array payload is ${raw.byteLength} bytes, expected ${count * itemSize}`,
    );
  }

  let bytes = raw;
  if (!dtype.littleEndian) {
    bytes = new Uint8Array(raw); // swap on a copy
    for (let i = 0; i < bytes.length; i += itemSize) {
      for (let j = 0; j < itemSize / 2; j++) {
        const tmp = bytes[i + j];
        bytes[i + j] = bytes[i + itemSize - 1 - j];
        bytes[i + itemSize - 1 - j] = tmp;
      }
    }
  }
  // align for the typed-array view
  const aligned = new Uint8Array(bytes.length);
  aligned.set(bytes);
  const data =
    itemSize === 8
      ? new Float64Array(aligned.buffer, 0, count)
      : new Float32Array(aligned.buffer, 0, count);
  stub.resolved = { kind: 'ndarray', shape, dtype: dtype.code, data };
}

class Unpickler {
  private pos = 0;
  private stack: Value[] = [];
  private memo = new Map<number, Value>();
  private view: DataView;

  constructor(private buf: Uint8Array) {
    this.view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  }

  private need(n: number): void {
    if (this.pos + n > this.buf.length) throw new PickleError('truncated pickle stream');
  }

  private u8(): number {
    this.need(1);
    return this.buf[this.pos++];
  }

  private u16(): number {
    this.need(2);
    const v = this.view.getUint16(this.pos, true);
    this.pos += 2;
    return v;
  }

  private i32(): number {
    this.need(4);
    const v = this.view.getInt32(this.pos, true);
    this.pos += 4;
    return v;
  }

  private u32(): number {
    this.need(4);
    const v = this.view.getUint32(this.pos, true);
    this.pos += 4;
    return v;
  }

  private u64(): number {
    this.need(8);
    const v = this.view.getBigUint64(this.pos, true);
    this.pos += 8;
    if (v > BigInt(Number.MAX_SAFE_INTEGER)) throw new PickleError('length too large');
    return Number(v);
  }

  private take(n: number): Uint8Array {
    this.need(n);
    const out = this.buf.subarray(this.pos, this.pos + n);
    this.pos += n;
    return out;
  }

  private line(): string {
    const start = this.pos;
    while (this.pos < this.buf.length && this.buf[this.pos] !== 0x0a) this.pos++;
    if (this.pos >= this.buf.length) throw new PickleError('unterminated text line');
    const text = Buffer.from(this.buf.subarray(start, this.pos)).toString('latin1');
    this.pos++; // consume '\n'
    return text;
  }

  private popMark(): Value[] {
    const idx = this.stack.lastIndexOf(MARK_SENTINEL);
    if (idx < 0) throw new PickleError('no MARK on stack');
    const items = this.stack.splice(idx + 1);
    this.stack.pop(); // the mark itself
    return items;
  }

  private push(v: Value): void {
    this.stack.push(v);
  }

  private pop(): Value {
    if (this.stack.length === 0) throw new PickleError('stack underflow');
    return this.stack.pop();
  }

  private top(): Value {
    if (this.stack.length === 0) throw new PickleError('stack underflow');
    return this.stack[this.stack.length - 1];
  }

  private keyOf(v: Value): string {
    if (typeof v === 'string') return v;
    if (v instanceof Py2String) return v.asText();
    throw new PickleError('dict keys must be strings');
  }

  private reduce(callable: Value, args: Value[]): Value {
    if (isGlobal(callable, /^numpy\.(core|_core)\.multiarray$/, '_reconstruct')) {
      const stub: ArrayStub = { kind: 'array-stub' };
      return stub;
    }
    if (isGlobal(callable, /^numpy$/, 'dtype')) {
      const code = this.keyOf(args[0]);
      // a leading order character may be part of the construction string
      const m = /^([<>|=]?)([a-z][0-9]+)$/.exec(code);
      if (!m) throw new PickleError(`unsupported dtype constructor '${code}'`);
      return {
        kind: 'dtype',
        code: m[2],
        littleEndian: m[1] !== '>',
      } satisfies DTypeStub;
    }
    if (isGlobal(callable, /^_codecs$/, 'encode')) {
      // protocol-2 streams written by python 3 smuggle bytes as latin-1 text
      const text = args[0];
      const codec = this.keyOf(args[1]);
      if (typeof text !== 'string' || codec !== 'latin1') {
        throw new PickleError('unsupported _codecs.encode arguments');
      }
      return new Uint8Array(Buffer.from(text, 'latin1'));
    }
    const g = callable as GlobalRef;
    const what = g && g.kind === 'global' ? `${g.module}.${g.name}` : String(callable);
    throw new PickleError(`refusing to construct ${what}`);
  }

  load(): Value {
    for (;;) {
      const op = this.u8();
      switch (op) {
        case Op.PROTO:
          this.u8();
          break;
        case Op.FRAME:
          this.u64();
          break;
        case Op.STOP:
          return this.pop();

        case Op.MARK:
          this.push(MARK_SENTINEL);
          break;
        case Op.EMPTY_DICT:
          this.push(new Map<string, Value>());
          break;
        case Op.SETITEM: {
          const value = this.pop();
          const key = this.pop();
          (this.top() as Map<string, Value>).set(this.keyOf(key), value);
          break;
        }
        case Op.SETITEMS: {
          const items = this.popMark();
          const dict = this.top() as Map<string, Value>;
          for (let i = 0; i < items.length; i += 2) {
            dict.set(this.keyOf(items[i]), items[i + 1]);
          }
          break;
        }
        case Op.EMPTY_LIST:
          this.push([]);
          break;
        case Op.APPEND: {
          const value = this.pop();
          (this.top() as Value[]).push(value);
          break;
        }
        case Op.APPENDS: {
          const items = this.popMark();
          (this.top() as Value[]).push(...items);
          break;
        }

        case Op.EMPTY_TUPLE:
          this.push([]);
          break;
        case Op.TUPLE:
          this.push(this.popMark());
          break;
        case Op.TUPLE1: {
          const a = this.pop();
          this.push([a]);
          break;
        }
        case Op.TUPLE2: {
          const b = this.pop();
          const a = this.pop();
          this.push([a, b]);
          break;
        }
        case Op.TUPLE3: {
          const c = this.pop();
          const b = this.pop();
          const a = this.pop();
          this.push([a, b, c]);
          break;
        }

        case Op.NONE:
          this.push(null);
          break;
        case Op.NEWTRUE:
          this.push(true);
          break;
        case Op.NEWFALSE:
          this.push(false);
          break;

        case Op.BININT:
          this.push(this.i32());
          break;
        case Op.BININT1:
          this.push(this.u8());
          break;
        case Op.BININT2:
          this.push(this.u16());
          break;
        case Op.LONG1: {
          const n = this.u8();
          const bytes = this.take(n);
          let value = 0n;
          for (let i = n - 1; i >= 0; i--) value = (value << 8n) | BigInt(bytes[i]);
          if (n > 0 && bytes[n - 1] & 0x80) value -= 1n << BigInt(8 * n);
          if (value > BigInt(Number.MAX_SAFE_INTEGER) || value < BigInt(-Number.MAX_SAFE_INTEGER)) {
            throw new PickleError('integer too large');
          }
          this.push(Number(value));
          break;
        }
        case Op.BINFLOAT: {
          this.need(8);
          const v = this.view.getFloat64(this.pos, false); // big-endian
          this.pos += 8;
          this.push(v);
          break;
        }

        case Op.SHORT_BINSTRING:
          this.push(new Py2String(this.take(this.u8())));
          break;
        case Op.BINSTRING:
          this.push(new Py2String(this.take(this.u32())));
          break;
        case Op.BINBYTES:
          this.push(this.take(this.u32()));
          break;
        case Op.SHORT_BINBYTES:
          this.push(this.take(this.u8()));
          break;
        case Op.BINBYTES8:
          this.push(this.take(this.u64()));
          break;
        case Op.BINUNICODE:
          this.push(Buffer.from(this.take(this.u32())).toString('utf-8'));
          break;
        case Op.SHORT_BINUNICODE:
          this.push(Buffer.from(this.take(this.u8())).toString('utf-8'));
          break;

        case Op.BINPUT:
          this.memo.set(this.u8(), this.top());
          break;
        case Op.LONG_BINPUT:
          this.memo.set(this.u32(), this.top());
          break;
        case Op.MEMOIZE:
          this.memo.set(this.memo.size, this.top());
          break;
        case Op.BINGET: {
          const idx = this.u8();
          if (!this.memo.has(idx)) throw new PickleError(`memo ${idx} not set`);
          this.push(this.memo.get(idx));
          break;
        }
        case Op.LONG_BINGET: {
          const idx = this.u32();
          if (!this.memo.has(idx)) throw new PickleError(`memo ${idx} not set`);
          this.push(this.memo.get(idx));
          break;
        }

        case Op.GLOBAL: {
          const module = this.line();
          const name = this.line();
          this.push({ kind: 'global', module, name } satisfies GlobalRef);
          break;
        }
        case Op.STACK_GLOBAL: {
          const name = this.keyOf(this.pop());
          const module = this.keyOf(this.pop());
          this.push({ kind: 'global', module, name } satisfies GlobalRef);
          break;
        }

        case Op.REDUCE:
        case Op.NEWOBJ: {
          const args = this.pop() as Value[];
          const callable = this.pop();
          this.push(this.reduce(callable, args));
          break;
        }
        case Op.BUILD: {
          const state = this.pop();
          const target = this.top();
          const stub = target as ArrayStub;
          const dtype = target as DTypeStub;
          if (stub && stub.kind === 'array-stub') {
            finalizeArray(stub, state as Value[]);
          } else if (dtype && dtype.kind === 'dtype') {
            // dtype state: (version, byteorder, ...)
            const order = (state as Value[])[1];
            const ch = typeof order === 'string' ? order : (order as Py2String)?.asText?.();
            if (ch === '>') dtype.littleEndian = false;
          } else {
            throw new PickleError('BUILD on an unsupported object');
          }
          break;
        }

        default:
          throw new PickleError(`unsupported pickle opcode 0x${op.toString(16)}`);
      }
    }
  }
}

function materialize(v: Value): Value {
  if (v && (v as ArrayStub).kind === 'array-stub') {
    const stub = v as ArrayStub;
    if (!stub.resolved) throw new PickleError('array was never BUILt');
    return stub.resolved;
  }
  return v;
}

/** Parse a pickled dict of named numpy arrays. */
export function loadArrayArchive(buf: Uint8Array): Map<string, NdArray> {
  const root = new Unpickler(buf).load();
  if (!(root instanceof Map)) {
    throw new PickleError('archive root is not a dict');
  }
  const out = new Map<string, NdArray>();
  for (const [key, value] of root) {
    const m = materialize(value);
    if ((m as NdArray)?.kind !== 'ndarray') {
      throw new PickleError(`entry '${key}' is not an array`);
    }
    out.set(key, m as NdArray);
  }
  return out;
}
