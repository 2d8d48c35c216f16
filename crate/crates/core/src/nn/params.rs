use crate::error::{Error, Result};

/// A fixed, ordered collection of parameter slices.
///
/// Gradients are stored in a value of the same type, so the visiting order
/// defines both the optimizer layout and the checkpoint layout.
pub trait Parameters {
    fn visit(&self, f: &mut dyn FnMut(&[f64]));
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64]));

    fn param_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |s| n += s.len());
        n
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        self.visit(&mut |s| out.extend_from_slice(s));
        out
    }

    fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        let expected = self.param_count();
        if flat.len() != expected {
            return Err(Error::Shape(format!(
                "expected {expected} parameters, got {}",
                flat.len()
            )));
        }
        let mut offset = 0;
        self.visit_mut(&mut |s| {
            s.copy_from_slice(&flat[offset..offset + s.len()]);
            offset += s.len();
        });
        Ok(())
    }

    fn fill(&mut self, value: f64) {
        self.visit_mut(&mut |s| s.fill(value));
    }

    /// `self += scale · other`, slice by slice.
    fn add_scaled(&mut self, other: &Self, scale: f64)
    where
        Self: Sized,
    {
        let flat = other.to_flat();
        let mut offset = 0;
        self.visit_mut(&mut |s| {
            for (a, b) in s.iter_mut().zip(&flat[offset..]) {
                *a += scale * b;
            }
            offset += s.len();
        });
    }
}
