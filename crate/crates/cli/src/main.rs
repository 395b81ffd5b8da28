mod args;
mod report;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{BenchArgs, Cli, Command, Format, GenArgs, SolveArgs};
use report::Report;
use superscs::bench::{run_suite, write_artifacts, GeneratorSpec, SuiteSpec};
use superscs::{solve_with_progress, ConicProblem, IterationRecord, Status};

const EXIT_INPUT: u8 = 1;
const EXIT_TIMEOUT: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => run_solve(&a),
        Command::Gen(a) => run_gen(&a).map(|()| ExitCode::SUCCESS),
        Command::Bench(a) => run_bench(&a).map(|()| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn write_output(path: Option<&std::path::Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn run_solve(a: &SolveArgs) -> Result<ExitCode> {
    let bytes = fs::read(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let problem = ConicProblem::load(&bytes).with_context(|| format!("loading {}", a.file.display()))?;
    let params = a.solver.params();
    params.validate()?;

    let every = a.log_every;
    let mut log = |r: &IterationRecord| {
        if r.iter == 0 {
            eprintln!("{}", IterationRecord::CSV_HEADER);
        }
        if r.iter % every == 0 {
            eprintln!("{}", r.to_csv());
        }
    };
    let progress: Option<&mut dyn FnMut(&IterationRecord)> = if every > 0 { Some(&mut log) } else { None };
    let out = solve_with_progress(&problem, &params, None, progress)?;

    let report = Report::new(&problem, &out);
    let text = match a.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    write_output(a.output.as_deref(), &text)?;
    Ok(match out.status {
        Status::TimedOut => ExitCode::from(EXIT_TIMEOUT),
        _ => ExitCode::SUCCESS,
    })
}

fn run_gen(a: &GenArgs) -> Result<()> {
    let spec = GeneratorSpec::new(a.family.family(), a.seed);
    let problem = spec.generate()?;
    write_output(a.output.as_deref(), &(problem.to_json() + "\n"))
}

fn run_bench(a: &BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&a.suite).with_context(|| format!("reading {}", a.suite.display()))?;
    let suite = SuiteSpec::from_json(&text)?;
    let report = run_suite(&suite, a.jobs)?;
    write_artifacts(&report, &a.output, suite.svg && !a.no_svg)?;
    for row in &report.sgm {
        eprintln!("{}: sgm10 = {:.4}s, solved {:.0}%", row.solver, row.sgm10, 100.0 * row.success_rate);
    }
    Ok(())
}
