// Command line: plots segregation|flocking|snapshot --in <path> --out <dir>.
// Inputs are read-only; the figure is built in memory first, so a schema
// error never leaves a partial file behind.

import * as fs from "node:fs";
import * as path from "node:path";

import { SchemaError, parseCsv } from "./table";
import { buildSegregationFigure, readAggregate } from "./segregation";
import { buildFlockingFigure, findRunDirs, loadRunStream, summarizeByNoise } from "./flocking";
import { buildSnapshotFigure, loadSnapshotInput } from "./snapshot";

const USAGE = `usage: plots <segregation|flocking|snapshot> --in <path> --out <dir>

  segregation   --in points at a batch aggregate.csv (or its directory)
  flocking      --in points at a directory of run records
  snapshot      --in points at a run directory written with --states
`;

interface Args {
  command: string;
  input: string;
  out: string;
}

const parseArgs = (argv: string[]): Args => {
  const command = argv[0];
  if (command === undefined || !["segregation", "flocking", "snapshot"].includes(command)) {
    throw new SchemaError(USAGE.trimEnd());
  }
  let input: string | undefined;
  let out: string | undefined;
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new SchemaError(`missing value for ${flag}`);
    }
    if (flag === "--in") {
      input = value;
    } else if (flag === "--out") {
      out = value;
    } else {
      throw new SchemaError(`unknown flag ${flag}`);
    }
  }
  if (input === undefined || out === undefined) {
    throw new SchemaError(USAGE.trimEnd());
  }
  return { command, input, out };
};

const buildSegregation = (input: string): string => {
  const csvPath = fs.statSync(input).isDirectory() ? path.join(input, "aggregate.csv") : input;
  const table = parseCsv(fs.readFileSync(csvPath, "utf-8"), csvPath);
  return buildSegregationFigure(readAggregate(table, csvPath));
};

const buildFlocking = (input: string): string => {
  const runs = findRunDirs(input).map(loadRunStream);
  return buildFlockingFigure(summarizeByNoise(runs));
};

export const main = (argv: string[]): number => {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
  try {
    let svg: string;
    if (args.command === "segregation") {
      svg = buildSegregation(args.input);
    } else if (args.command === "flocking") {
      svg = buildFlocking(args.input);
    } else {
      svg = buildSnapshotFigure(loadSnapshotInput(args.input));
    }
    fs.mkdirSync(args.out, { recursive: true });
    const target = path.join(args.out, `${args.command}.svg`);
    fs.writeFileSync(target, svg);
    console.log(`wrote ${target}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && "code" in err) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
};
