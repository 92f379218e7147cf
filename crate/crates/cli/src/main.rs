use clap::Parser;

fn main() {
    let cli = taildep_cli::Cli::parse();
    if let Err(err) = taildep_cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(taildep_cli::exit_code(&err));
    }
}
