//! Fixed numeric formatting shared by CSV and text reports.

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn num(v: f64) -> String {
    // Adding zero folds −0 into +0.
    format!("{:.16e}", v + 0.0)
}

/// Versioned first line of every CSV file.
pub fn csv_header(subcommand: &str) -> String {
    format!("# groupoid-flow v1 {subcommand}\n")
}

pub fn csv_row<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = fields.into_iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>().join(",");
    out.push('\n');
    out
}
