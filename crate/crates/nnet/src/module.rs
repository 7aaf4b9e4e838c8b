use crate::layers::Slot;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// A composite network whose tensors can be enumerated by dotted name.
pub trait Module<T: Scalar> {
    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, Slot, &mut Tensor<T>));

    fn visit(&self, f: &mut dyn FnMut(&str, Slot, &Tensor<T>));

    fn zero_grad(&mut self) {
        self.visit_mut(&mut |_, slot, t| {
            if slot == Slot::Param {
                t.zero_grad();
            }
        });
    }

    fn num_params(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_, slot, t| {
            if slot == Slot::Param {
                n += t.len();
            }
        });
        n
    }

    /// Flattened copy of every parameter value, in visit order.
    fn param_vector(&self) -> Vec<T> {
        let mut out = Vec::new();
        self.visit(&mut |_, slot, t| {
            if slot == Slot::Param {
                out.extend_from_slice(&t.data);
            }
        });
        out
    }
}

/// Visit a child layer's tensors under `prefix.`.
pub(crate) fn visit_child_mut<T: Scalar>(
    prefix: &str,
    child: &mut dyn crate::layers::Layer<T>,
    f: &mut dyn FnMut(&str, Slot, &mut Tensor<T>),
) {
    child.visit_mut(&mut |name, slot, t| f(&format!("{prefix}.{name}"), slot, t));
}

pub(crate) fn visit_child<T: Scalar>(
    prefix: &str,
    child: &dyn crate::layers::Layer<T>,
    f: &mut dyn FnMut(&str, Slot, &Tensor<T>),
) {
    child.visit(&mut |name, slot, t| f(&format!("{prefix}.{name}"), slot, t));
}
