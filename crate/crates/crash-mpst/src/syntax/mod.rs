//! Text formats: protocols, process scripts and printed local types.

mod lexer;
mod local;
mod process;
mod protocol;
mod render;

pub use local::parse_local;
pub use process::{check_process, parse_process, parse_process_script, ProcessScript};
pub use protocol::{parse_protocol, parse_protocol_diagnostics, ProtocolDecl};
pub use render::{render_global, render_global_brief, render_local, render_protocol};
