use clap::Parser;

fn main() {
    let cli = tkdv_cli::Cli::parse();
    if let Err(e) = tkdv_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
