use clap::Parser;

fn main() {
    let cli = groupoid_flow_cli::Cli::parse();
    std::process::exit(groupoid_flow_cli::run(&cli));
}
