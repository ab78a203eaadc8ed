//! Parsing of scheme selectors, alternative lists and m lists.

use progcens::{catalog_scheme, catalog_table6, CensoringScheme, DistributionFamily, LabeledScheme};

use crate::error::{CliError, CliResult};

/// Resolves a scheme selector.
///
/// * `table6` (or `all`): the 27 catalog schemes
/// * `[1],[15]` or `1,15`: catalog schemes by label
/// * `20:0,2,1,0,3,0,0,2,0,2`: an explicit scheme `n:removals`
///
/// Several selectors can be joined with `;`.
pub fn parse_schemes(selector: &str) -> CliResult<Vec<LabeledScheme>> {
    let mut out = Vec::new();
    for part in selector.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        if part.eq_ignore_ascii_case("table6") || part.eq_ignore_ascii_case("all") {
            out.extend(catalog_table6());
        } else if let Some((n, removals)) = part.split_once(':') {
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| CliError::UnknownSelector(part.to_string()))?;
            let scheme = CensoringScheme::parse(n, removals)?;
            out.push(LabeledScheme {
                label: part.to_string(),
                scheme,
            });
        } else {
            for label in part.split(',').map(str::trim).filter(|l| !l.is_empty()) {
                let found =
                    catalog_scheme(label).ok_or_else(|| CliError::UnknownSelector(label.to_string()))?;
                out.push(found);
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::UnknownSelector(selector.to_string()));
    }
    Ok(out)
}

pub fn parse_alternatives(list: &str) -> CliResult<Vec<DistributionFamily>> {
    let alts: Vec<DistributionFamily> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<DistributionFamily>())
        .collect::<Result<_, _>>()?;
    if alts.is_empty() {
        return Err(CliError::Usage("no alternatives given".into()));
    }
    Ok(alts)
}

pub fn parse_m_list(list: &str) -> CliResult<Vec<usize>> {
    let ms: Vec<usize> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .ok()
                .filter(|&m| m >= 2)
                .ok_or_else(|| CliError::Usage(format!("invalid m value {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    if ms.is_empty() {
        return Err(CliError::Usage("no m values given".into()));
    }
    Ok(ms)
}
