use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use stratkit::completion::completion_budgets;
use stratkit::syntax::tokenize;
use stratkit::{Budgets, Error, Flow, Session};

/// Run strategy scripts, or start an interactive session when no script is given.
#[derive(Parser, Debug)]
#[command(name = "stratkit", version)]
struct Args {
    /// Script of modules and commands to execute.
    script: Option<PathBuf>,
    /// States allowed in one fixpoint computation.
    #[arg(long)]
    max_states: Option<usize>,
    /// Nested strategy calls allowed.
    #[arg(long)]
    max_depth: Option<usize>,
    /// Equation applications allowed per normalization.
    #[arg(long)]
    max_eq_steps: Option<usize>,
    /// No banner or prompt in interactive mode.
    #[arg(long, short)]
    quiet: bool,
}

impl Args {
    fn apply(&self, mut b: Budgets) -> Budgets {
        if let Some(n) = self.max_states {
            b.max_states = n;
        }
        if let Some(n) = self.max_depth {
            b.max_depth = n;
        }
        if let Some(n) = self.max_eq_steps {
            b.max_eq_steps = n;
        }
        b
    }
}

fn exit_code(e: &Error) -> ExitCode {
    if e.is_budget() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

/// True once every opened module block is closed and the last token ends a statement.
fn complete_input(buf: &str) -> bool {
    let toks = tokenize(buf);
    let mut depth = 0i64;
    for t in &toks {
        match t.text.as_str() {
            "mod" | "fmod" | "smod" => depth += 1,
            "endm" | "endfm" | "endsm" => depth -= 1,
            _ => {}
        }
    }
    let last = toks.last().map(|t| t.text.as_str());
    depth <= 0 && matches!(last, Some(".") | Some("endm") | Some("endfm") | Some("endsm") | Some("quit") | Some("q"))
}

fn repl(session: &mut Session, quiet: bool) -> ExitCode {
    let stdin = io::stdin();
    let mut stdout = io::stdout();
    if !quiet {
        println!("stratkit {} (type `quit` to leave)", env!("CARGO_PKG_VERSION"));
    }
    let mut buf = String::new();
    let mut status = ExitCode::SUCCESS;
    loop {
        if !quiet {
            print!("{}", if buf.is_empty() { "> " } else { "| " });
            let _ = stdout.flush();
        }
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => return status,
            Ok(_) => {}
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
        buf.push_str(&line);
        if buf.trim().is_empty() {
            buf.clear();
            continue;
        }
        if !complete_input(&buf) {
            continue;
        }
        let text = std::mem::take(&mut buf);
        match session.run(&text, &mut stdout) {
            Ok(Flow::Quit) => return status,
            Ok(Flow::Continue) => status = ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                status = exit_code(&e);
            }
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut session = Session::new(args.apply(Budgets::default()));
    if args.max_states.is_some() || args.max_depth.is_some() || args.max_eq_steps.is_some() {
        session.completion_budgets = Some(args.apply(completion_budgets()));
    }
    let Some(path) = &args.script else {
        return repl(&mut session, args.quiet);
    };
    let mut stdout = io::stdout();
    match session.load(path, &mut stdout) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
