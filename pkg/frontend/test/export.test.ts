import { createHash } from 'crypto'
import { readFileSync, writeFileSync } from 'fs'
import { basename, join } from 'path'
import { describe, expect, it } from 'vitest'

import { decodeCfea } from '../src/cfea.js'
import { DataError, FetchError, ParamError } from '../src/errors.js'
import { exportFeatures } from '../src/exporter.js'
import { makeCropsDir, tempDir } from './helpers.js'

async function exportTo(dir: string, out: string, extra = {}) {
  return exportFeatures({ cropsDir: dir, backbone: 'test', out, ...extra })
}

describe('exportFeatures', () => {
  it('writes one row per crop with the documented dim (10-crop shape contract)', async () => {
    const dir = makeCropsDir(10)
    const out = join(tempDir(), 'feats.cfea')
    const result = await exportTo(dir, out)
    expect(result.n).toBe(10)
    expect(result.dim).toBe(64)
    const payload = decodeCfea(readFileSync(out))
    expect(payload.n).toBe(10)
    expect(payload.dim).toBe(64)
    const manifest = JSON.parse(readFileSync(result.manifest, 'utf-8'))
    expect(manifest.backbone).toEqual({
      name: 'test',
      version: '1',
      dim: 64,
      preprocessing: {
        resize: 32,
        normalize: 'ink mass (1 - intensity), L2-normalized output',
      },
    })
    expect(manifest.n).toBe(10)
    expect(manifest.document_id).toBe(basename(dir))
    expect(manifest.feature_source).toBe('external')
  })

  it('re-exports identical crops byte-identically', async () => {
    const dir = makeCropsDir(8)
    const work = tempDir()
    const first = await exportTo(dir, join(work, 'a.cfea'))
    const second = await exportTo(dir, join(work, 'b.cfea'))
    expect(readFileSync(first.out).equals(readFileSync(second.out))).toBe(true)
    expect(
      readFileSync(first.manifest, 'utf-8'),
    ).toBe(readFileSync(second.manifest, 'utf-8'))
  })

  it('is independent of batch size', async () => {
    const dir = makeCropsDir(9)
    const work = tempDir()
    const payloads = []
    for (const batchSize of [1, 4, 100]) {
      const r = await exportTo(dir, join(work, `b${batchSize}.cfea`), { batchSize })
      payloads.push(readFileSync(r.out))
    }
    expect(payloads[0].equals(payloads[1])).toBe(true)
    expect(payloads[0].equals(payloads[2])).toBe(true)
  })

  it('keeps rows in index order, auditable via the checksum column', async () => {
    const dir = makeCropsDir(6)
    const work = tempDir()
    const forward = await exportTo(dir, join(work, 'fwd.cfea'))
    const fwdRows = decodeCfea(readFileSync(forward.out))
    const fwdManifest = JSON.parse(readFileSync(forward.manifest, 'utf-8'))

    // manifest checksums really are the crop files' digests, in order
    const index = JSON.parse(readFileSync(join(dir, 'index.json'), 'utf-8'))
    for (let i = 0; i < index.length; i++) {
      expect(fwdManifest.crops[i].file).toBe(index[i].file)
      const digest = createHash('sha256')
        .update(readFileSync(join(dir, index[i].file)))
        .digest('hex')
      expect(fwdManifest.crops[i].sha256).toBe(digest)
    }

    // reversing the index reverses the rows
    writeFileSync(join(dir, 'index.json'), JSON.stringify([...index].reverse()))
    const backward = await exportTo(dir, join(work, 'bwd.cfea'))
    const bwdRows = decodeCfea(readFileSync(backward.out))
    const n = fwdRows.n
    for (let i = 0; i < n; i++) {
      const a = fwdRows.vectors.slice(64 * i, 64 * (i + 1))
      const b = bwdRows.vectors.slice(64 * (n - 1 - i), 64 * (n - i))
      expect([...a]).toEqual([...b])
    }
  })

  it('honors docId and batch-size validation', async () => {
    const dir = makeCropsDir(3)
    const out = join(tempDir(), 'named.cfea')
    const r = await exportTo(dir, out, { docId: 'codex-07' })
    const manifest = JSON.parse(readFileSync(r.manifest, 'utf-8'))
    expect(manifest.document_id).toBe('codex-07')
    await expect(exportTo(dir, out, { batchSize: 0 })).rejects.toThrow(ParamError)
    await expect(exportTo(dir, out, { batchSize: 2.5 })).rejects.toThrow(ParamError)
  })

  it('propagates backbone and index failures', async () => {
    const dir = makeCropsDir(3)
    const out = join(tempDir(), 'x.cfea')
    await expect(
      exportFeatures({ cropsDir: dir, backbone: 'clip', out }),
    ).rejects.toThrow(FetchError)
    await expect(
      exportFeatures({ cropsDir: dir, backbone: 'nope', out }),
    ).rejects.toThrow(ParamError)
    await expect(
      exportFeatures({ cropsDir: tempDir(), backbone: 'test', out }),
    ).rejects.toThrow(DataError)
  })
})
