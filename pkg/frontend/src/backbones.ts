/** Backbone registry.
 *
 * Every backbone declares the metadata that lands in the export manifest
 * (name, version, output dim, pinned preprocessing) plus an async loader
 * returning the actual embedding function. The four pretrained backbones
 * require weights that must be obtained out of band; until a runtime
 * adapter registers a working implementation their loaders raise
 * FetchError. The `test` backbone is a fully deterministic seeded
 * projection that needs no weights, used for pipeline verification and
 * offline smoke runs.
 */

import { FetchError, ParamError } from './errors.js'
import { CropImage, resizeNearest } from './png.js'

export interface Preprocessing {
  /** square side every crop is resampled to before normalization */
  resize: number
  normalize: string
  aggregation?: string
}

export interface BackboneModel {
  embed(batch: CropImage[]): Float32Array[]
}

export interface Backbone {
  name: string
  version: string
  dim: number
  preprocessing: Preprocessing
  /** feature_source recorded for the primary toolkit's loader */
  featureSource: string
  load(opts: { modelsDir?: string; device: string }): Promise<BackboneModel>
}

const registry = new Map<string, Backbone>()

export function registerBackbone(b: Backbone): void {
  registry.set(b.name, b)
}

export function getBackbone(name: string): Backbone {
  const b = registry.get(name)
  if (!b) {
    throw new ParamError(
      `unknown backbone ${JSON.stringify(name)}; available: ${listBackbones().join(', ')}`,
    )
  }
  return b
}

export function listBackbones(): string[] {
  return [...registry.keys()].sort()
}

function pretrained(
  name: string,
  version: string,
  dim: number,
  preprocessing: Preprocessing,
): Backbone {
  return {
    name,
    version,
    dim,
    preprocessing,
    featureSource: name,
    async load() {
      throw new FetchError(
        `weights for ${name}@${version} are not obtainable in this environment ` +
          `(no bundled runtime, no download source); register a runtime adapter ` +
          `via registerBackbone() or export with --backbone test`,
      )
    },
  }
}

// penultimate fully-connected activations; the convolutional stages are
// too spatial for whole-symbol similarity
registerBackbone(
  pretrained('vgg16', 'imagenet-1k', 4096, {
    resize: 224,
    normalize: 'imagenet-mean-std, gray replicated to 3 channels',
  }),
)
registerBackbone(
  pretrained('clip', 'vit-b32', 512, {
    resize: 224,
    normalize: 'clip-mean-std, gray replicated to 3 channels',
  }),
)
registerBackbone(
  pretrained('ocr_generic', 'printed-base', 256, {
    resize: 128,
    normalize: 'unit-interval grayscale',
    aggregation: 'encoder-token max-pool',
  }),
)
registerBackbone(
  pretrained('ocr_handwritten', 'handwritten-base', 256, {
    resize: 128,
    normalize: 'unit-interval grayscale',
    aggregation: 'encoder-token max-pool',
  }),
)

// --- deterministic test backbone --------------------------------------------

const TEST_SIDE = 32
const TEST_DIM = 64

function fnv1a(s: string): number {
  let h = 0x811c9dc5
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i)
    h = Math.imul(h, 0x01000193) >>> 0
  }
  return h >>> 0
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0
  return () => {
    a = (a + 0x6d2b79f5) >>> 0
    let t = a
    t = Math.imul(t ^ (t >>> 15), t | 1)
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61)
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

function testProjection(seed: number): Float64Array {
  const rand = mulberry32(seed)
  const input = TEST_SIDE * TEST_SIDE
  const scale = 1 / Math.sqrt(input)
  const p = new Float64Array(input * TEST_DIM)
  for (let i = 0; i < p.length; i++) {
    p[i] = (2 * rand() - 1) * scale
  }
  return p
}

function makeTestBackbone(): Backbone {
  const name = 'test'
  const version = '1'
  return {
    name,
    version,
    dim: TEST_DIM,
    preprocessing: {
      resize: TEST_SIDE,
      normalize: 'ink mass (1 - intensity), L2-normalized output',
    },
    featureSource: 'external',
    async load() {
      const p = testProjection(fnv1a(`${name}@${version}`))
      return {
        embed(batch: CropImage[]): Float32Array[] {
          return batch.map(img => {
            const pixels = resizeNearest(img, TEST_SIDE)
            const out = new Float64Array(TEST_DIM)
            for (let i = 0; i < pixels.length; i++) {
              const ink = 1 - pixels[i]
              if (ink === 0) continue
              for (let j = 0; j < TEST_DIM; j++) {
                out[j] += ink * p[i * TEST_DIM + j]
              }
            }
            let norm = 0
            for (let j = 0; j < TEST_DIM; j++) norm += out[j] * out[j]
            norm = Math.sqrt(norm)
            const row = new Float32Array(TEST_DIM)
            if (norm > 1e-12) {
              for (let j = 0; j < TEST_DIM; j++) row[j] = Math.fround(out[j] / norm)
            }
            return row
          })
        },
      }
    },
  }
}

registerBackbone(makeTestBackbone())
