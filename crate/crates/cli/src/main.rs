use clap::Parser;

fn main() {
    let cli = match fishery_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version displays are not usage errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = fishery_cli::run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
