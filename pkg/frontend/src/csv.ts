// Strict reader for the sweep CSV schema emitted by `cohmdi sweep`.

export const SWEEP_COLUMNS = [
  "loss_db",
  "epsilon",
  "gamma_sq",
  "alpha_opt",
  "R",
  "e_ph_U",
  "e_bit",
  "Q",
  "gamma_obs",
  "flag",
] as const;

export interface SweepRow {
  loss_db: number;
  epsilon: number;
  /** raw epsilon field, used as an exact grouping key */
  epsilonKey: string;
  gamma_sq: number;
  /** raw gamma_sq field, used as an exact grouping key */
  gammaSqKey: string;
  alpha_opt: number;
  R: number;
  e_ph_U: number;
  e_bit: number;
  Q: number;
  gamma_obs: number;
  flag: string;
}

export class CsvSchemaError extends Error {}

export function parseSweepCsv(text: string, source = "<csv>"): SweepRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvSchemaError(`${source}: file is empty (no header)`);
  }
  const header = lines[0].split(",");
  const expected = new Set<string>(SWEEP_COLUMNS);
  const seen = new Set(header);
  const missing = [...expected].filter((c) => !seen.has(c));
  const unexpected = header.filter((c) => !expected.has(c));
  if (missing.length > 0 || unexpected.length > 0) {
    const parts = [];
    if (missing.length > 0) parts.push(`missing column(s): ${missing.join(", ")}`);
    if (unexpected.length > 0) parts.push(`unexpected column(s): ${unexpected.join(", ")}`);
    throw new CsvSchemaError(`${source}: ${parts.join("; ")}`);
  }
  const col = new Map(header.map((name, i) => [name, i]));
  const at = (fields: string[], name: string) => fields[col.get(name)!];

  const rows: SweepRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i].split(",");
    if (fields.length !== header.length) {
      throw new CsvSchemaError(
        `${source}: line ${i + 1} has ${fields.length} fields, expected ${header.length}`,
      );
    }
    const num = (name: string): number => {
      const value = Number(at(fields, name));
      if (!Number.isFinite(value)) {
        throw new CsvSchemaError(
          `${source}: line ${i + 1}, column ${name}: not a finite number: ${at(fields, name)}`,
        );
      }
      return value;
    };
    rows.push({
      loss_db: num("loss_db"),
      epsilon: num("epsilon"),
      epsilonKey: at(fields, "epsilon"),
      gamma_sq: num("gamma_sq"),
      gammaSqKey: at(fields, "gamma_sq"),
      alpha_opt: num("alpha_opt"),
      R: num("R"),
      e_ph_U: num("e_ph_U"),
      e_bit: num("e_bit"),
      Q: num("Q"),
      gamma_obs: num("gamma_obs"),
      flag: at(fields, "flag"),
    });
  }
  if (rows.length === 0) {
    throw new CsvSchemaError(`${source}: no data rows`);
  }
  return rows;
}
