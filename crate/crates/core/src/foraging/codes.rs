use crate::error::{Error, Result};
use crate::ids::CodeId;
use crate::model::{Code, Project};

/// Twelve-colour qualitative palette; codes without an explicit colour cycle
/// through it by codebook size.
pub const PALETTE: [&str; 12] = [
    "#a6cee3", "#1f78b4", "#b2df8a", "#33a02c", "#fb9a99", "#e31a1c", "#fdbf6f", "#ff7f00",
    "#cab2d6", "#6a3d9a", "#ffff99", "#b15928",
];

fn normalize_color(color: &str) -> Result<String> {
    let hex = color.strip_prefix('#').unwrap_or(color);
    if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(Error::Validation(format!("`{color}` is not an RGB hex colour")));
    }
    Ok(format!("#{}", hex.to_ascii_lowercase()))
}

pub fn create_code(project: &mut Project, label: &str, color: Option<&str>) -> Result<Code> {
    let label = label.trim();
    if label.is_empty() {
        return Err(Error::Validation("code label must not be empty".into()));
    }
    let folded = label.to_lowercase();
    if project.codebook.iter().any(|c| c.label.to_lowercase() == folded) {
        return Err(Error::Conflict(format!("code `{label}` already exists")));
    }
    let color = match color {
        Some(c) => normalize_color(c)?,
        None => PALETTE[project.codebook.len() % PALETTE.len()].to_owned(),
    };
    let code = Code {
        id: CodeId(project.fresh_id("code")),
        label: label.to_owned(),
        color,
        description: None,
    };
    project.codebook.push(code.clone());
    Ok(code)
}

/// Codes whose label starts with `prefix`, ignoring case, sorted by label.
pub fn suggest_codes(project: &Project, prefix: &str) -> Vec<Code> {
    let prefix = prefix.to_lowercase();
    let mut found: Vec<Code> = project
        .codebook
        .iter()
        .filter(|c| c.label.to_lowercase().starts_with(&prefix))
        .cloned()
        .collect();
    found.sort_by(|a, b| a.label.to_lowercase().cmp(&b.label.to_lowercase()).then_with(|| a.label.cmp(&b.label)));
    found
}
