use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use dnafec::base_codec::{constraints_check, parse_fasta, write_fasta, ConstraintSpec};
use dnafec::harness::{self, ExperimentConfig, HarnessError};
use dnafec::pipelines::{decode_archive, encode_archive, ArchiveManifest, PipelineError, PipelineSpec};

create_exception!(dnafec, DecodeError, PyException, "Raised when reads cannot be decoded back to the data.");

fn pipeline_err(e: PipelineError) -> PyErr {
    if e.is_decode_failure() {
        DecodeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(format!("line {} column {}: {e}", e.line(), e.column()))
}

fn harness_err(e: HarnessError) -> PyErr {
    match e {
        HarnessError::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyException::new_err(e.to_string()),
    }
}

/// Encodes `data` into (fasta_text, manifest_json). `config` is a pipeline
/// spec JSON overriding the named scheme's defaults.
#[pyfunction]
#[pyo3(signature = (data, pipeline = "rs_rs", config = None))]
fn encode(py: Python<'_>, data: &[u8], pipeline: &str, config: Option<&str>) -> PyResult<(String, String)> {
    let spec: PipelineSpec = match config {
        Some(text) => serde_json::from_str(text).map_err(json_err)?,
        None => PipelineSpec::by_name(pipeline)
            .ok_or_else(|| PyValueError::new_err(format!("unknown pipeline {pipeline:?}")))?,
    };
    spec.validate().map_err(pipeline_err)?;
    let (records, manifest) = py.detach(|| encode_archive(data, &spec)).map_err(pipeline_err)?;
    let manifest = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    Ok((write_fasta(&records), manifest))
}

/// Decodes FASTA reads with the manifest produced by `encode`.
#[pyfunction]
fn decode(py: Python<'_>, fasta: &str, manifest: &str) -> PyResult<Vec<u8>> {
    let manifest: ArchiveManifest = serde_json::from_str(manifest).map_err(json_err)?;
    let records = parse_fasta(fasta).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.detach(|| decode_archive(&records, &manifest)).map_err(pipeline_err)
}

/// Runs an experiment config JSON and returns the result CSV.
#[pyfunction]
#[pyo3(signature = (config, threads = 1))]
fn simulate(py: Python<'_>, config: &str, threads: usize) -> PyResult<String> {
    let config: ExperimentConfig = serde_json::from_str(config).map_err(json_err)?;
    let points = py.detach(|| harness::sweep(&config, None, threads)).map_err(harness_err)?;
    harness::to_csv(&config, &points).map_err(harness_err)
}

/// Returns (gc_fraction, max_homopolymer_run, within_constraints).
#[pyfunction]
#[pyo3(signature = (seq, gc_min = 0.45, gc_max = 0.55, max_homopolymer = 3))]
fn check_constraints(seq: &str, gc_min: f64, gc_max: f64, max_homopolymer: usize) -> PyResult<(f64, usize, bool)> {
    let c = ConstraintSpec { gc_min, gc_max, max_homopolymer };
    c.validate().map_err(|e| PyValueError::new_err(e.to_string()))?;
    let r = constraints_check(seq, &c);
    Ok((r.gc_fraction, r.max_run, r.is_valid()))
}

#[pymodule]
#[pyo3(name = "dnafec")]
fn dnafec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(check_constraints, m)?)?;
    m.add("DecodeError", m.py().get_type::<DecodeError>())?;
    m.add("CSV_HEADER", harness::CSV_HEADER.to_vec())?;
    Ok(())
}
