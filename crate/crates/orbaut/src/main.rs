use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use orbaut::codeaut::DEFAULT_BUDGET;
use orbaut::data::{DataSet, DATA_ENV};
use orbaut::niemeier::{build, minus_one_outside_weyl};
use orbaut::orbifold::{compute_report, report_problems, Context, LatticeReport, OrbifoldError};

#[derive(Parser, Debug)]
#[command(name = "orbaut", version, about = "Automorphism data for Z2-orbifolds of Niemeier lattice VOAs")]
struct Cli {
    /// Directory whose data files override the built-in ones.
    #[arg(long, global = true, env = DATA_ENV)]
    data: Option<PathBuf>,
    /// Node budget for each automorphism search.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Worker threads (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Include per-stage timings in reports.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The Niemeier lattices; "yes" marks those whose -1 isometry is outside the Weyl group.
    List,
    /// Full report for one lattice.
    Compute {
        name: String,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        markdown: bool,
        /// Fail if the result disagrees with the reference data.
        #[arg(long)]
        validate: bool,
    },
    /// Rebuild the summary table for all 14 lattices.
    Table1 {
        #[arg(long)]
        json: bool,
        #[arg(long)]
        markdown: bool,
        #[arg(long)]
        validate: bool,
    },
}

fn load(cli: &Cli) -> Result<Context, String> {
    let data = match &cli.data {
        Some(dir) => DataSet::from_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?,
        None => DataSet::default(),
    };
    Context::load(&data).map_err(|e| e.to_string())
}

fn problems(ctx: &Context, r: &LatticeReport) -> Vec<String> {
    let mut out = report_problems(r);
    match ctx.golden_row(&r.lattice) {
        Some(g) => out.extend(
            r.row.compare(g).into_iter().map(|m| format!("{}: expected {}, found {}", m.field, m.expected, m.found)),
        ),
        None => out.push("no reference row".into()),
    }
    out
}

fn report(ctx: &Context, name: &str, cli: &Cli) -> Result<LatticeReport, OrbifoldError> {
    let mut r = compute_report(ctx, name, cli.budget)?;
    if !cli.timings {
        r.timings_ms.clear();
    }
    Ok(r)
}

fn print_report(r: &LatticeReport) {
    println!("lattice      {}", r.lattice);
    println!("V_1          {}  (rank {})", r.row.v1, r.row.rank);
    println!("G_2(N)       {} (order {})", r.g2_name, r.g2_order);
    println!("N_0/Q        {}", r.n0_order);
    println!("C_N          order {} (expected {})", r.cn_order, r.cn_expected_order);
    if let Some(a) = &r.aut_cn {
        println!("Aut(C_N)     order {} = {} x {}", a.order, a.aut1_order, a.aut2_order);
    }
    println!("K(V)         {} (2af = {})", r.kv.name, r.kv.expected_order);
    println!("Out_1        {}", r.row.out1);
    println!("Out_2        {}", r.row.out2);
    if let Some(w) = &r.witnesses {
        for c in &w.checks {
            let ok = c.stabilizes && c.satisfied;
            println!("witness      {} {} -> {:?} {}", c.u, c.expect, c.slot_perm, if ok { "ok" } else { "FAILED" });
        }
        println!("generated    {} of {} ({} extra)", w.generated_order, w.full_order, w.extra_generators);
    }
    for (stage, ms) in &r.timings_ms {
        println!("time         {stage} {ms} ms");
    }
}

fn markdown(rows: &[&LatticeReport]) {
    println!("| N | V_1 | rank | K(V) | Out_1 | Out_2 | No. |");
    println!("|---|---|---|---|---|---|---|");
    for r in rows {
        let x = &r.row;
        let no = x.number.map(|n| n.to_string()).unwrap_or_default();
        println!("| {} | {} | {} | {} | {} | {} | {} |", x.lattice, x.v1, x.rank, x.kv, x.out1, x.out2, no);
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global().map_err(|e| e.to_string())?;
    }
    let ctx = load(&cli)?;
    match &cli.command {
        Command::List => {
            for code in &ctx.codes {
                let lattice = build(code).map_err(|e| e.to_string())?;
                let flag = if minus_one_outside_weyl(&lattice) { "yes" } else { "no" };
                println!("{:<10} {flag}", code.name);
            }
            Ok(true)
        }
        Command::Compute { name, json, markdown: md, validate } => {
            let r = report(&ctx, name, &cli).map_err(|e| e.to_string())?;
            if *json {
                println!("{}", serde_json::to_string_pretty(&r).map_err(|e| e.to_string())?);
            } else if *md {
                markdown(&[&r]);
            } else {
                print_report(&r);
            }
            let p = problems(&ctx, &r);
            for x in &p {
                eprintln!("{name}: {x}");
            }
            Ok(!*validate || p.is_empty())
        }
        Command::Table1 { json, markdown: md, validate } => {
            let mut names: Vec<(u32, String)> = ctx.golden.iter().map(|g| (g.number, g.lattice.clone())).collect();
            names.sort();
            let rows: Vec<Result<LatticeReport, OrbifoldError>> =
                names.par_iter().map(|(_, n)| report(&ctx, n, &cli)).collect();
            let rows: Vec<LatticeReport> = rows.into_iter().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
            if *json {
                let t: Vec<_> = rows.iter().map(|r| &r.row).collect();
                println!("{}", serde_json::to_string_pretty(&t).map_err(|e| e.to_string())?);
            } else if *md {
                markdown(&rows.iter().collect::<Vec<_>>());
            } else {
                for r in &rows {
                    let x = &r.row;
                    println!(
                        "{:<10} {:<18} {:>2}  {:<10} {:<3} {}",
                        x.lattice,
                        x.v1,
                        x.rank,
                        x.kv,
                        x.out1.to_string(),
                        x.out2
                    );
                }
            }
            let mut ok = true;
            for r in &rows {
                for x in problems(&ctx, r) {
                    eprintln!("{}: {x}", r.lattice);
                    ok = false;
                }
            }
            Ok(!*validate || ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
