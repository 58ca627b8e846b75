use pyo3::prelude::*;

#[pymodule]
fn gauss_engine_py(_py: Python<'_>, _m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
