import { readFileSync } from 'fs';

// Schema written by the simulation harness. Columns the producing
// subcommand did not compute hold the literal token "nan".
export const HEADER = 'n,msd_theory,msd_mc,msd_theory_db,msd_mc_db,mean_dev_norm';

export interface CurveFile {
  path: string;
  n: number[];
  theoryDb: number[];
  mcDb: number[];
  // exact source tokens, kept so rendering can embed the values untouched
  nText: string[];
  theoryDbText: string[];
  mcDbText: string[];
}

function parseToken(token: string, path: string, line: number): number {
  if (token === 'nan') return NaN;
  if (token === 'inf') return Infinity;
  if (token === '-inf') return -Infinity;
  const value = Number(token);
  if (token.trim() === '' || Number.isNaN(value)) {
    throw new Error(`${path}:${line}: not a number: '${token}'`);
  }
  return value;
}

export function parseCurveCsv(text: string, path: string): CurveFile {
  const lines = text.split('\n');
  if (lines.length > 0 && lines[lines.length - 1] === '') lines.pop();
  if (lines.length === 0 || lines[0] !== HEADER) {
    throw new Error(`${path}: expected header '${HEADER}'`);
  }
  if (lines.length < 2) {
    throw new Error(`${path}: no data rows`);
  }
  const out: CurveFile = {
    path,
    n: [], theoryDb: [], mcDb: [],
    nText: [], theoryDbText: [], mcDbText: [],
  };
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(',');
    if (cells.length !== 6) {
      throw new Error(`${path}:${i + 1}: expected 6 columns, got ${cells.length}`);
    }
    out.n.push(parseToken(cells[0], path, i + 1));
    out.theoryDb.push(parseToken(cells[3], path, i + 1));
    out.mcDb.push(parseToken(cells[4], path, i + 1));
    out.nText.push(cells[0]);
    out.theoryDbText.push(cells[3]);
    out.mcDbText.push(cells[4]);
  }
  return out;
}

export function readCurveFile(path: string): CurveFile {
  let text: string;
  try {
    text = readFileSync(path, 'utf8');
  } catch (err) {
    throw new Error(`${path}: ${(err as Error).message}`);
  }
  return parseCurveCsv(text, path);
}
