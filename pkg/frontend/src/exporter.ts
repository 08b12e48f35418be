/** The export operation: crops directory -> CFEA file + JSON manifest.
 *
 * One feature row per crop, in index order; inference is batched but a
 * single writer assembles and writes the output. The manifest pins the
 * backbone identity and preprocessing, and carries one checksum per crop
 * so row order can be audited after the fact. Everything is
 * deterministic: re-exporting identical crops yields byte-identical
 * files.
 */

import { createHash } from 'crypto'
import { readFileSync, writeFileSync } from 'fs'
import { basename } from 'path'

import { getBackbone } from './backbones.js'
import { encodeCfea } from './cfea.js'
import { CropEntry, readCropIndex } from './cropIndex.js'
import { DataError, ParamError } from './errors.js'
import { readCropPng } from './png.js'

export interface ExportJob {
  cropsDir: string
  backbone: string
  out: string
  batchSize?: number
  device?: string
  /** override for where pretrained weights are looked up */
  modelsDir?: string
  /** document id recorded in the manifest; defaults to the crops dir name */
  docId?: string
}

export interface ExportResult {
  n: number
  dim: number
  out: string
  manifest: string
}

export async function exportFeatures(job: ExportJob): Promise<ExportResult> {
  const batchSize = job.batchSize ?? 32
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    throw new ParamError(`batch size must be a positive integer, got ${job.batchSize}`)
  }
  const backbone = getBackbone(job.backbone)
  const entries = readCropIndex(job.cropsDir)
  const model = await backbone.load({
    modelsDir: job.modelsDir,
    device: job.device ?? 'cpu',
  })

  const rows: Float32Array[] = []
  const checksums: string[] = []
  for (let start = 0; start < entries.length; start += batchSize) {
    const batch = entries.slice(start, start + batchSize)
    const images = batch.map(e => {
      checksums.push(sha256File(e.path))
      return readCropPng(e.path)
    })
    for (const row of model.embed(images)) {
      rows.push(row)
    }
  }
  if (rows.length !== entries.length) {
    throw new DataError(
      `backbone produced ${rows.length} rows for ${entries.length} crops`,
    )
  }

  const payload = encodeCfea(rows, backbone.dim)
  const manifest = {
    document_id: job.docId ?? basename(job.cropsDir),
    feature_source: backbone.featureSource,
    backbone: {
      name: backbone.name,
      version: backbone.version,
      dim: backbone.dim,
      preprocessing: backbone.preprocessing,
    },
    n: rows.length,
    crops: entries.map((e: CropEntry, i: number) => ({
      file: e.file,
      sha256: checksums[i],
    })),
  }
  const manifestPath = job.out.replace(/\.[^./\\]*$/, '') + '.json'
  writeFileSync(job.out, payload)
  writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + '\n')
  return { n: rows.length, dim: backbone.dim, out: job.out, manifest: manifestPath }
}

function sha256File(path: string): string {
  return createHash('sha256').update(readFileSync(path)).digest('hex')
}
