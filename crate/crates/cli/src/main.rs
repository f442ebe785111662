use clap::Parser;

fn main() {
    let cli = hdw_forge::cli::Cli::parse();
    let code = hdw_forge::cli::run(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
