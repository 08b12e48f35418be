/** Crop image loading: 8-bit PNGs to normalized grayscale planes. */

import { readFileSync } from 'fs'
import { PNG } from 'pngjs'

import { DataError } from './errors.js'

export interface CropImage {
  width: number
  height: number
  /** row-major intensities in [0, 1]; 0 is ink, 1 is paper */
  data: Float32Array
}

export function readCropPng(path: string): CropImage {
  let png: PNG
  try {
    png = PNG.sync.read(readFileSync(path))
  } catch (e) {
    throw new DataError(`cannot decode ${path}: ${(e as Error).message}`)
  }
  const { width, height } = png
  if (width < 1 || height < 1) {
    throw new DataError(`${path} has empty dimensions ${width}x${height}`)
  }
  // pngjs expands every color type to RGBA8; crops are grayscale so the
  // red channel carries the intensity
  const data = new Float32Array(width * height)
  for (let i = 0; i < data.length; i++) {
    data[i] = png.data[4 * i] / 255
  }
  return { width, height, data }
}

/** Nearest-neighbor resample to a square side, the shared preprocessing
 * step every backbone applies before its own normalization. */
export function resizeNearest(img: CropImage, side: number): Float32Array {
  const out = new Float32Array(side * side)
  for (let y = 0; y < side; y++) {
    const sy = Math.min(img.height - 1, Math.floor((y * img.height) / side))
    for (let x = 0; x < side; x++) {
      const sx = Math.min(img.width - 1, Math.floor((x * img.width) / side))
      out[y * side + x] = img.data[sy * img.width + sx]
    }
  }
  return out
}
