mod inspect;
mod report;
mod search;
mod serve;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::failure::Failure;

pub use inspect::{cost, validate};
pub use report::{analyze, export, select};
pub use search::search;
pub use serve::serve;

/// Reads JSON or TOML, chosen by extension.
fn read_structured<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) {
    print_line(&serde_json::to_string_pretty(value).expect("serializable"));
}

/// Writes one stdout line; a closed pipe is not an error.
fn print_line(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}
