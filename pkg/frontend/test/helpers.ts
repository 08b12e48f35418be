import { mkdtempSync, writeFileSync } from 'fs'
import { tmpdir } from 'os'
import { join } from 'path'
import { PNG } from 'pngjs'

/** Grayscale PNG from a painter: painter(x, y) -> intensity 0..255. */
export function writePng(
  path: string,
  width: number,
  height: number,
  painter: (x: number, y: number) => number,
): void {
  const png = new PNG({ width, height })
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = 4 * (y * width + x)
      const v = painter(x, y)
      png.data[i] = v
      png.data[i + 1] = v
      png.data[i + 2] = v
      png.data[i + 3] = 255
    }
  }
  writeFileSync(path, PNG.sync.write(png))
}

export function tempDir(prefix = 'embed-export-'): string {
  return mkdtempSync(join(tmpdir(), prefix))
}

/** A crops directory with n distinct glyph-like crops and a segment-style
 * index.json. Crop k is a filled square whose size grows with k. */
export function makeCropsDir(n: number, dir = tempDir()): string {
  const entries = []
  for (let k = 0; k < n; k++) {
    const file = `page_l00_s${String(k).padStart(4, '0')}.png`
    const side = 12 + k
    writePng(join(dir, file), side, side, (x, y) =>
      x >= 2 && x < 2 + 4 + k && y >= 2 && y < 2 + 4 + (k % 3) ? 0 : 255,
    )
    entries.push({
      page: 'page',
      line: Math.floor(k / 10),
      bbox: [5 * k, 3, side, side],
      file,
    })
  }
  writeFileSync(join(dir, 'index.json'), JSON.stringify(entries, null, 2))
  return dir
}
