/** Reader for the segmenter's crop index (index.json in a crops directory).
 *
 * The index is a JSON array, one entry per symbol in reading order:
 * { "page": str, "line": int, "bbox": [x, y, w, h], "file": str }.
 * Row order of every export equals this index order.
 */

import { existsSync, readFileSync } from 'fs'
import { join } from 'path'

import { DataError } from './errors.js'

export interface CropEntry {
  page: string
  line: number
  bbox: [number, number, number, number]
  file: string
  /** absolute path, resolved against the crops directory */
  path: string
}

export function readCropIndex(cropsDir: string): CropEntry[] {
  const indexPath = join(cropsDir, 'index.json')
  if (!existsSync(indexPath)) {
    throw new DataError(`no index.json under ${cropsDir}`)
  }
  let parsed: unknown
  try {
    parsed = JSON.parse(readFileSync(indexPath, 'utf-8'))
  } catch (e) {
    throw new DataError(`${indexPath} is not valid JSON: ${(e as Error).message}`)
  }
  if (!Array.isArray(parsed)) {
    throw new DataError(`${indexPath} must contain a JSON array`)
  }
  if (parsed.length === 0) {
    throw new DataError(`${indexPath} lists no crops`)
  }

  const entries: CropEntry[] = []
  for (let i = 0; i < parsed.length; i++) {
    const raw = parsed[i]
    const why = describeCorruption(raw)
    if (why) {
      throw new DataError(`index entry ${i} is corrupt: ${why}`)
    }
    const entry = raw as { page: string; line: number; bbox: number[]; file: string }
    entries.push({
      page: entry.page,
      line: entry.line,
      bbox: entry.bbox as [number, number, number, number],
      file: entry.file,
      path: join(cropsDir, entry.file),
    })
  }

  const missing = entries.filter(e => !existsSync(e.path)).map(e => e.file)
  if (missing.length > 0) {
    throw new DataError(`missing crop files: ${missing.join(', ')}`)
  }
  return entries
}

function describeCorruption(raw: unknown): string | null {
  if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
    return `expected an object, got ${JSON.stringify(raw)}`
  }
  const e = raw as Record<string, unknown>
  if (typeof e.file !== 'string' || e.file.length === 0) {
    return `"file" must be a non-empty string, got ${JSON.stringify(e.file)}`
  }
  if (typeof e.page !== 'string') {
    return `"page" must be a string, got ${JSON.stringify(e.page)}`
  }
  if (typeof e.line !== 'number' || !Number.isInteger(e.line) || e.line < 0) {
    return `"line" must be a non-negative integer, got ${JSON.stringify(e.line)}`
  }
  if (
    !Array.isArray(e.bbox) ||
    e.bbox.length !== 4 ||
    e.bbox.some(v => typeof v !== 'number')
  ) {
    return `"bbox" must be [x, y, w, h], got ${JSON.stringify(e.bbox)}`
  }
  return null
}
