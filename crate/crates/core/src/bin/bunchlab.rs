fn main() {
    bunchlab::cli::configure_threads();
    let code = bunchlab::cli::run(
        std::env::args_os(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    std::process::exit(code);
}
