#!/usr/bin/env node
import { writeFileSync } from 'fs';
import { basename } from 'path';
import { PlotJob, render } from './svg';

const USAGE =
  'usage: plot <csv>... --out <file> [--panels] [--labels a,b,...] [--title t]';

export function parseArgs(argv: string[]): PlotJob {
  const csvPaths: string[] = [];
  let out = '';
  let panels = false;
  let title = '';
  let labels: string[] | null = null;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === '--out') {
      out = argv[++i] ?? '';
    } else if (arg === '--panels') {
      panels = true;
    } else if (arg === '--title') {
      title = argv[++i] ?? '';
    } else if (arg === '--labels') {
      labels = (argv[++i] ?? '').split(',');
    } else if (arg.startsWith('--')) {
      throw new Error(`unknown option ${arg}\n${USAGE}`);
    } else {
      csvPaths.push(arg);
    }
  }
  if (csvPaths.length === 0 || out === '') {
    throw new Error(USAGE);
  }
  if (labels === null) {
    labels = csvPaths.map((p) => basename(p).replace(/\.csv$/, ''));
  }
  if (labels.length !== csvPaths.length) {
    throw new Error(`got ${labels.length} labels for ${csvPaths.length} ` +
                    `csv files`);
  }
  return { csvPaths, labels, outputPath: out, title, panels };
}

export function main(argv: string[]): number {
  let job: PlotJob;
  try {
    job = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
  try {
    const svg = render(job);
    writeFileSync(job.outputPath, svg);
  } catch (err) {
    console.error(`plot: ${(err as Error).message}`);
    return 1;
  }
  console.log(`wrote ${job.outputPath}`);
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
