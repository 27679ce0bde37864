use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    if let Ok(t) = std::env::var("QWAVE_THREADS") {
        match t.trim().parse::<usize>() {
            Ok(n) if n > 0 => qwave::par::init_threads(n),
            _ => {
                eprintln!("error: QWAVE_THREADS must be a positive integer, got {t:?}");
                return ExitCode::from(2);
            }
        }
    }
    let code = qwave::qcli::run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
