//! Drives the command-line front end in-process, exactly as the `schelling`
//! binary would, and prints the oracle report for the hopping preset.

fn main() {
    let code = schelling::cli::main_with_args([
        "schelling",
        "oracle",
        "--preset",
        "fig7",
        "--horizon",
        "h:2",
    ]);
    eprintln!("exit code {code}");
}
