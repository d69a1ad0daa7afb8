//! Long-format plot tables from profile CSV files.

use std::path::Path;

use crate::runner::render_csv;
use crate::CliError;

/// Headline column per profile header, in lookup order.
const VALUE_COLUMNS: [&str; 4] = ["cover_size", "entropy", "p_star", "c_value"];

/// Rows `experiment,n,value,quantity`. The experiment label is the file stem;
/// crosscheck files tag the quantity with their `profile` column.
pub fn emit_plot_data(paths: &[impl AsRef<Path>]) -> Result<String, CliError> {
    let mut records = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let experiment = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        let header = reader.headers().map_err(|e| CliError::io(format!("{}: {e}", path.display())))?.clone();
        let find = |name: &str| header.iter().position(|h| h == name);
        let n_col = find("n").ok_or_else(|| CliError::config(format!("{}: no `n` column", path.display())))?;
        let (value_col, quantity) = VALUE_COLUMNS
            .iter()
            .find_map(|q| find(q).map(|c| (c, *q)))
            .ok_or_else(|| CliError::config(format!("{}: not a profile file", path.display())))?;
        let profile_col = find("profile");
        for row in reader.records() {
            let row = row.map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            let q = match profile_col {
                Some(p) => format!("{quantity}_{}", &row[p]),
                None => quantity.to_string(),
            };
            records.push(vec![experiment.clone(), row[n_col].to_string(), row[value_col].to_string(), q]);
        }
    }
    Ok(render_csv(&["experiment", "n", "value", "quantity"], &records))
}
