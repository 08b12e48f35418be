/** Error taxonomy shared by the exporter; exit codes match the primary
 * toolkit's CLI convention (2 = bad parameters, 3 = bad data/environment). */

export class ExportError extends Error {
  readonly exitCode: number

  constructor(message: string, exitCode = 3) {
    super(message)
    this.name = new.target.name
    this.exitCode = exitCode
  }
}

/** Caller passed an unusable option (unknown backbone, batch size < 1...). */
export class ParamError extends ExportError {
  constructor(message: string) {
    super(message, 2)
  }
}

/** The crops directory or its index is missing, malformed, or inconsistent. */
export class DataError extends ExportError {}

/** A CFEA buffer violates the binary layout. */
export class FormatError extends ExportError {}

/** Backbone weights could not be obtained (no local copy, no download). */
export class FetchError extends ExportError {}
