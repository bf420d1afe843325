use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::Tensor;
use crate::{Error, Result};

/// A trainable tensor with its gradient slot and Adam moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: Tensor,
    /// `None` until a backward pass (or [`ParamStore::zero_grads`]) fills it.
    pub grad: Option<Tensor>,
    pub adam_m: Tensor,
    pub adam_v: Tensor,
}

impl Param {
    pub fn new(value: Tensor) -> Param {
        let shape = value.shape().to_vec();
        Param {
            value,
            grad: None,
            adam_m: Tensor::zeros(&shape),
            adam_v: Tensor::zeros(&shape),
        }
    }
}

/// Named parameters, iterated in name order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    entries: BTreeMap<String, Param>,
}

impl ParamStore {
    pub fn new() -> ParamStore {
        ParamStore::default()
    }

    /// Adds a parameter; names must be unique.
    pub fn insert(&mut self, name: &str, value: Tensor) -> Result<()> {
        if self.entries.contains_key(name) {
            return Err(Error::Config(alloc::format!("duplicate parameter `{name}`")));
        }
        self.entries.insert(name.to_string(), Param::new(value));
        Ok(())
    }

    /// Inserts or replaces a fully specified entry (used when restoring checkpoints).
    pub fn insert_param(&mut self, name: &str, param: Param) -> Result<()> {
        if param.adam_m.shape() != param.value.shape()
            || param.adam_v.shape() != param.value.shape()
            || param.grad.as_ref().is_some_and(|g| g.shape() != param.value.shape())
        {
            return Err(crate::error::dimension(alloc::format!(
                "parameter `{name}` has inconsistent slot shapes"
            )));
        }
        self.entries.insert(name.to_string(), param);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Param> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Param> {
        self.entries
            .get_mut(name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }

    pub fn value(&self, name: &str) -> Result<&Tensor> {
        self.get(name).map(|p| &p.value)
    }

    pub fn value_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        self.get_mut(name).map(|p| &mut p.value)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Param)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Param)> {
        self.entries.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total scalar count across all parameters.
    pub fn scalar_count(&self) -> usize {
        self.entries.values().map(|p| p.value.len()).sum()
    }

    /// Sets every gradient slot to zeros.
    pub fn zero_grads(&mut self) {
        for p in self.entries.values_mut() {
            match &mut p.grad {
                Some(g) => g.fill(0.0),
                None => p.grad = Some(Tensor::zeros(p.value.shape())),
            }
        }
    }

    /// Adds `scale * grads` into the gradient slots.
    pub fn accumulate(&mut self, grads: &Grads, scale: f64) -> Result<()> {
        for (name, g) in &grads.map {
            let p = self.get_mut(name)?;
            let slot = p.grad.get_or_insert_with(|| Tensor::zeros(g.shape()));
            slot.check_same_shape(g)?;
            for (s, v) in slot.data_mut().iter_mut().zip(g.data()) {
                *s += scale * v;
            }
        }
        Ok(())
    }

    /// Gradient slots as a name → tensor map (zeros for empty slots).
    pub fn gradients(&self) -> BTreeMap<String, Tensor> {
        self.entries
            .iter()
            .map(|(k, p)| {
                (
                    k.clone(),
                    p.grad.clone().unwrap_or_else(|| Tensor::zeros(p.value.shape())),
                )
            })
            .collect()
    }

    /// Values only, for comparisons in tests and checkpoint diffs.
    pub fn values(&self) -> Vec<(&str, &Tensor)> {
        self.entries.iter().map(|(k, p)| (k.as_str(), &p.value)).collect()
    }
}

/// Per-pass gradient buffer; entries are created on first touch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Grads {
    map: BTreeMap<String, Tensor>,
}

impl Grads {
    pub fn new() -> Grads {
        Grads::default()
    }

    /// Zeroed buffer shaped like the named parameter.
    pub fn entry(&mut self, store: &ParamStore, name: &str) -> Result<&mut Tensor> {
        if !self.map.contains_key(name) {
            let shape = store.value(name)?.shape().to_vec();
            self.map.insert(name.to_string(), Tensor::zeros(&shape));
        }
        Ok(self.map.get_mut(name).expect("inserted above"))
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Adds every entry of `other` into `self`.
    pub fn merge(&mut self, other: &Grads) -> Result<()> {
        for (name, g) in &other.map {
            match self.map.get_mut(name) {
                Some(mine) => mine.add_assign(g)?,
                None => {
                    self.map.insert(name.clone(), g.clone());
                }
            }
        }
        Ok(())
    }

    pub fn into_map(self) -> BTreeMap<String, Tensor> {
        self.map
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn names_unique() {
        let mut s = ParamStore::new();
        s.insert("w", Tensor::zeros(&[2])).unwrap();
        assert!(s.insert("w", Tensor::zeros(&[2])).is_err());
        assert!(matches!(s.get("x"), Err(Error::UnknownParameter(_))));
    }

    #[test]
    fn accumulate_scales() {
        let mut s = ParamStore::new();
        s.insert("w", Tensor::zeros(&[2])).unwrap();
        let mut g = Grads::new();
        g.entry(&s, "w").unwrap().data_mut().copy_from_slice(&[1.0, 2.0]);
        s.accumulate(&g, 0.5).unwrap();
        s.accumulate(&g, 0.5).unwrap();
        assert_eq!(s.get("w").unwrap().grad.as_ref().unwrap().data(), &[1.0, 2.0]);
        s.zero_grads();
        assert_eq!(s.gradients()["w"].data(), &vec![0.0, 0.0][..]);
    }
}
