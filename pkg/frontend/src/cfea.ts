/** CFEA binary feature files, bit-compatible with the primary toolkit.
 *
 * Layout: 4-byte magic "CFEA", then three little-endian uint32 fields
 * (version, row count N, dimension), then N*dim little-endian float32
 * values in row-major order.
 */

import { FormatError, DataError } from './errors.js'

export const MAGIC = 'CFEA'
export const VERSION = 1
const HEADER_BYTES = 16

export interface CfeaPayload {
  n: number
  dim: number
  /** row-major, length n * dim */
  vectors: Float32Array
}

export function encodeCfea(rows: Float32Array[], dim: number): Buffer {
  const n = rows.length
  if (n === 0 || dim < 1) {
    throw new DataError(`cannot encode an empty feature set (n=${n}, dim=${dim})`)
  }
  const buf = Buffer.alloc(HEADER_BYTES + 4 * n * dim)
  buf.write(MAGIC, 0, 'ascii')
  buf.writeUInt32LE(VERSION, 4)
  buf.writeUInt32LE(n, 8)
  buf.writeUInt32LE(dim, 12)
  const view = new DataView(buf.buffer, buf.byteOffset + HEADER_BYTES)
  for (let i = 0; i < n; i++) {
    const row = rows[i]
    if (row.length !== dim) {
      throw new DataError(`row ${i} has ${row.length} values, expected ${dim}`)
    }
    for (let j = 0; j < dim; j++) {
      const v = row[j]
      if (!Number.isFinite(v)) {
        throw new DataError(`row ${i} contains a non-finite value at column ${j}`)
      }
      view.setFloat32(4 * (i * dim + j), v, true)
    }
  }
  return buf
}

export function decodeCfea(buf: Buffer): CfeaPayload {
  if (buf.length < HEADER_BYTES || buf.toString('ascii', 0, 4) !== MAGIC) {
    throw new FormatError('not a CFEA buffer (bad magic)')
  }
  const version = buf.readUInt32LE(4)
  if (version !== VERSION) {
    throw new FormatError(`unsupported CFEA version ${version}`)
  }
  const n = buf.readUInt32LE(8)
  const dim = buf.readUInt32LE(12)
  const expected = HEADER_BYTES + 4 * n * dim
  if (buf.length !== expected) {
    throw new FormatError(
      `header declares ${n}x${dim} (${expected} bytes), buffer has ${buf.length}`,
    )
  }
  const view = new DataView(buf.buffer, buf.byteOffset + HEADER_BYTES)
  const vectors = new Float32Array(n * dim)
  for (let i = 0; i < vectors.length; i++) {
    vectors[i] = view.getFloat32(4 * i, true)
    if (!Number.isFinite(vectors[i])) {
      throw new DataError(`payload contains a non-finite value at index ${i}`)
    }
  }
  return { n, dim, vectors }
}
