#!/usr/bin/env node
/** Command line entry: `embed-export export --crops DIR --backbone NAME --out FILE.cfea` */

import { realpathSync } from 'fs'
import { pathToFileURL } from 'url'
import { parseArgs } from 'util'

import { listBackbones } from './backbones.js'
import { ExportError, ParamError } from './errors.js'
import { exportFeatures } from './exporter.js'

const USAGE = `usage: embed-export export --crops DIR --backbone NAME --out FILE.cfea
                    [--batch-size N] [--device DEV] [--models DIR] [--doc-id ID]

Runs a vision backbone over every segmented symbol crop listed in
DIR/index.json and writes the features as a CFEA file plus a JSON
manifest. Backbones: ${listBackbones().join(', ')}.`

export async function run(argv: string[]): Promise<number> {
  try {
    if (argv.length === 0 || argv[0] === '--help' || argv[0] === '-h') {
      console.log(USAGE)
      return 0
    }
    const [command, ...rest] = argv
    if (command !== 'export') {
      throw new ParamError(`unknown command ${JSON.stringify(command)}; expected "export"`)
    }
    const opts = parseExportArgs(rest)
    const result = await exportFeatures(opts)
    console.log(`wrote ${result.n} x ${result.dim} features to ${result.out}`)
    console.log(`manifest: ${result.manifest}`)
    return 0
  } catch (e) {
    if (e instanceof ExportError) {
      console.error(`error: ${e.message}`)
      return e.exitCode
    }
    throw e
  }
}

function parseExportArgs(rest: string[]) {
  let values: Record<string, string | undefined>
  try {
    values = parseArgs({
      args: rest,
      options: {
        crops: { type: 'string' },
        backbone: { type: 'string' },
        out: { type: 'string' },
        'batch-size': { type: 'string' },
        device: { type: 'string' },
        models: { type: 'string' },
        'doc-id': { type: 'string' },
      },
      allowPositionals: false,
    }).values
  } catch (e) {
    throw new ParamError((e as Error).message)
  }
  for (const required of ['crops', 'backbone', 'out'] as const) {
    if (!values[required]) {
      throw new ParamError(`--${required} is required\n${USAGE}`)
    }
  }
  let batchSize: number | undefined
  if (values['batch-size'] !== undefined) {
    batchSize = Number(values['batch-size'])
    if (!Number.isInteger(batchSize) || batchSize < 1) {
      throw new ParamError(`--batch-size must be a positive integer, got ${values['batch-size']}`)
    }
  }
  return {
    cropsDir: values.crops!,
    backbone: values.backbone!,
    out: values.out!,
    batchSize,
    device: values.device,
    modelsDir: values.models,
    docId: values['doc-id'],
  }
}

function isInvokedDirectly(): boolean {
  if (process.argv[1] === undefined) return false
  try {
    return import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href
  } catch {
    return false
  }
}

if (isInvokedDirectly()) {
  run(process.argv.slice(2)).then(
    code => {
      process.exitCode = code
    },
    e => {
      console.error(e)
      process.exitCode = 1
    },
  )
}
