use clap::Parser;

fn main() {
    let cli = naimark_cli::app::Cli::parse();
    if let Err(e) = naimark_cli::app::run(cli) {
        eprintln!("{}", e.line());
        std::process::exit(e.exit_code());
    }
}
