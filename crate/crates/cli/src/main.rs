use clap::Parser;

fn main() -> std::process::ExitCode {
    photon_teleport_cli::run(photon_teleport_cli::Cli::parse())
}
