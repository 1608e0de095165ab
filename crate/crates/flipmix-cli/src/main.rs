use clap::Parser;

fn main() {
    let cli = flipmix_cli::Cli::parse();
    match flipmix_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
