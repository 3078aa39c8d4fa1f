use pyo3::prelude::*;

#[pymodule]
fn cantor_maximal_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
