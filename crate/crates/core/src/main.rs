use std::io::{self, IsTerminal};

use causalkg::cli::{run, Io, NO_COLOR_ENV};

fn main() {
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let color = io::stderr().is_terminal() && std::env::var_os(NO_COLOR_ENV).is_none();
    let mut input = stdin.lock();
    let mut stdout = io::stdout().lock();
    let mut stderr = io::stderr().lock();
    let code = run(
        std::env::args_os(),
        &mut Io {
            stdin: &mut input,
            stdout: &mut stdout,
            stderr: &mut stderr,
            color,
            interactive,
        },
    );
    std::process::exit(code);
}
