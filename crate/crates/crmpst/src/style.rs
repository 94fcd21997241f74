use std::io::IsTerminal;

/// Whether to emit ANSI styling: stdout is a terminal and `CRMPST_COLOR`
/// is not `0`.
pub fn enabled() -> bool {
    std::env::var("CRMPST_COLOR").map_or(true, |v| v != "0") && std::io::stdout().is_terminal()
}

pub fn status(s: &str) -> String {
    if !enabled() {
        return s.to_string();
    }
    let code = match s {
        "holds" => "32",
        "violated" => "31",
        _ => "33",
    };
    format!("\x1b[{code}m{s}\x1b[0m")
}

pub fn bold(s: &str) -> String {
    if enabled() {
        format!("\x1b[1m{s}\x1b[0m")
    } else {
        s.to_string()
    }
}
