use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use maslov_cli::{run, Command, OutputFormat, EXIT_BAD_INPUT};

#[derive(Parser)]
#[command(name = "maslov", version, about = "Conjugate points, Dirichlet spectra and Maslov indices of Jacobi equations")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Io {
    /// Configuration file, or `-` for stdin.
    #[arg(long, short)]
    config: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    output: Format,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Sub {
    /// Conjugate points of the initial time with multiplicities.
    Conjugate(Io),
    /// Negative Dirichlet eigenvalues from the flow and from finite differences.
    Spectrum(Io),
    /// Morse index of the discretized index form.
    Hessian(Io),
    /// Intersection number of the closed rectangle loop.
    Rectangle(Io),
    /// All three counts with certification.
    Index(Io),
    /// Winding and intersection index of the rotation loop of a graph.
    MaslovLoop(Io),
    /// List the built-in profiles.
    Presets {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        output: Format,
    },
}

fn read_config(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MASLOV_LOG", "warn")).init();
    let cli = Cli::parse();
    let (command, io) = match cli.command {
        Sub::Conjugate(io) => (Command::Conjugate, Some(io)),
        Sub::Spectrum(io) => (Command::Spectrum, Some(io)),
        Sub::Hessian(io) => (Command::Hessian, Some(io)),
        Sub::Rectangle(io) => (Command::Rectangle, Some(io)),
        Sub::Index(io) => (Command::Index, Some(io)),
        Sub::MaslovLoop(io) => (Command::MaslovLoop, Some(io)),
        Sub::Presets { output } => {
            let out = run(Command::Presets, None, format(output));
            print!("{}", out.output);
            return ExitCode::SUCCESS;
        }
    };
    let io = io.expect("subcommand has IO options");
    let text = match read_config(&io.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("maslov: cannot read {}: {e}", io.config);
            return ExitCode::from(EXIT_BAD_INPUT as u8);
        }
    };
    let out = run(command, Some(&text), format(io.output));
    if let Some(msg) = &out.error {
        eprintln!("maslov: {msg}");
    }
    if !out.output.is_empty() {
        match &io.out {
            Some(path) => {
                if let Err(e) = std::fs::write(path, &out.output) {
                    eprintln!("maslov: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_BAD_INPUT as u8);
                }
            }
            None => print!("{}", out.output),
        }
    }
    ExitCode::from(out.exit_code as u8)
}

fn format(f: Format) -> OutputFormat {
    match f {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    }
}
