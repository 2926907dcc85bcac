use lgqp::{ScanConfig, ScanResult};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance of a scan: enough to regenerate its CSV.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    /// config with every default filled in
    pub config: ScanConfig,
    pub route: lgqp::Route,
    pub threads: Option<usize>,
    pub wall_seconds: f64,
    pub cells: usize,
    pub failed_cells: usize,
    pub config_sha256: String,
    pub csv_sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl Manifest {
    pub fn new(
        config: &ScanConfig,
        config_text: &str,
        csv: &str,
        result: &ScanResult,
        threads: Option<usize>,
        wall_seconds: f64,
    ) -> Manifest {
        Manifest {
            tool: "lgqp",
            version: env!("CARGO_PKG_VERSION"),
            config: config.clone(),
            route: config.route,
            threads,
            wall_seconds,
            cells: result.cells.len(),
            failed_cells: result.failed,
            config_sha256: sha256_hex(config_text.as_bytes()),
            csv_sha256: sha256_hex(csv.as_bytes()),
        }
    }
}

#[derive(Serialize)]
struct Twin<'a> {
    manifest: &'a Manifest,
    global: &'a Option<lgqp::scan::GlobalPoint>,
    cells: &'a [lgqp::scan::CellResult],
}

/// The JSON companion of the CSV: same cells, plus the manifest.
pub fn json_twin(manifest: &Manifest, result: &ScanResult) -> String {
    let twin = Twin {
        manifest,
        global: &result.global,
        cells: &result.cells,
    };
    serde_json::to_string_pretty(&twin).expect("serializable") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
