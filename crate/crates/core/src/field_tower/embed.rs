use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::field::{FieldDescriptor, FieldError, FqElement};

/// A field homomorphism `source -> target`, fixed by the image of the class of x.
#[derive(Debug)]
pub struct EmbeddingMap {
    source: Arc<FieldDescriptor>,
    target: Arc<FieldDescriptor>,
    image_of_generator: u32,
    table: Vec<u32>,
}

impl EmbeddingMap {
    fn with_image(source: Arc<FieldDescriptor>, target: Arc<FieldDescriptor>, image: u32) -> Self {
        let p = source.p();
        let k = source.degree() as usize;
        let mut powers = Vec::with_capacity(k);
        let mut cur = 1u32;
        for _ in 0..k {
            powers.push(cur);
            cur = target.mul(cur, image);
        }
        let mut table = vec![0u32; source.size() as usize];
        for (code, slot) in table.iter_mut().enumerate() {
            let mut c = code as u32;
            let mut acc = 0u32;
            for pw in &powers {
                let d = c % p;
                if d != 0 {
                    acc = target.add(acc, target.mul(d, *pw));
                }
                c /= p;
            }
            *slot = acc;
        }
        EmbeddingMap {
            source,
            target,
            image_of_generator: image,
            table,
        }
    }

    pub fn source(&self) -> &Arc<FieldDescriptor> {
        &self.source
    }
    pub fn target(&self) -> &Arc<FieldDescriptor> {
        &self.target
    }
    pub fn image_of_generator(&self) -> FqElement {
        FqElement::new(self.target.clone(), self.image_of_generator)
    }

    #[inline]
    pub fn apply_code(&self, code: u32) -> u32 {
        self.table[code as usize]
    }

    pub fn apply(&self, x: &FqElement) -> FqElement {
        assert!(super::field::same_field(x.field(), &self.source));
        FqElement::new(self.target.clone(), self.apply_code(x.code()))
    }
}

fn check_pair(src: &FieldDescriptor, dst: &FieldDescriptor) -> Result<(), FieldError> {
    if src.p() != dst.p() {
        return Err(FieldError::CharacteristicMismatch(src.p(), dst.p()));
    }
    if !dst.degree().is_multiple_of(src.degree()) {
        return Err(FieldError::NoEmbedding {
            src: src.degree(),
            dst: dst.degree(),
        });
    }
    Ok(())
}

/// `fq_embed`: the embedding sending x to the smallest root (in code order) of the
/// source modulus inside the target.
pub fn fq_embed(
    src: &Arc<FieldDescriptor>,
    dst: &Arc<FieldDescriptor>,
) -> Result<EmbeddingMap, FieldError> {
    check_pair(src, dst)?;
    let root = (0..dst.size())
        .find(|&z| dst.eval_fp_poly(src.modulus(), z) == 0)
        .expect(
            "an irreducible of degree d has a root in every extension of degree divisible by d",
        );
    Ok(EmbeddingMap::with_image(src.clone(), dst.clone(), root))
}

/// The norm-compatible inclusion between canonical fields. These compose: the
/// inclusion d -> k equals (j -> k) after (d -> j) for all d | j | k.
pub fn canonical_inclusion(
    src: &Arc<FieldDescriptor>,
    dst: &Arc<FieldDescriptor>,
) -> Result<Arc<EmbeddingMap>, FieldError> {
    check_pair(src, dst)?;
    assert!(
        src.is_canonical() && dst.is_canonical(),
        "canonical fields expected"
    );
    let key = (src.p(), src.degree(), dst.degree());
    if let Some(m) = cache().lock().unwrap().get(&key) {
        return Ok(m.clone());
    }
    let map = if src.degree() == 1 {
        // constants map to themselves
        EmbeddingMap::with_image(src.clone(), dst.clone(), src.generator_code())
    } else {
        let e = (dst.size() as u64 - 1) / (src.size() as u64 - 1);
        let image = dst.pow(dst.generator_code(), e);
        EmbeddingMap::with_image(src.clone(), dst.clone(), image)
    };
    let map = Arc::new(map);
    Ok(cache().lock().unwrap().entry(key).or_insert(map).clone())
}

type EmbedCache = Mutex<HashMap<(u32, u32, u32), Arc<EmbeddingMap>>>;

fn cache() -> &'static EmbedCache {
    static C: OnceLock<EmbedCache> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Isomorphism of any field onto the canonical field of the same degree.
pub fn to_canonical(src: &Arc<FieldDescriptor>) -> Result<EmbeddingMap, FieldError> {
    let canon = FieldDescriptor::canonical(src.p(), src.degree())?;
    if src.is_canonical() {
        return Ok(EmbeddingMap::with_image(
            src.clone(),
            canon,
            src.generator_code(),
        ));
    }
    fq_embed(src, &canon)
}

/// Smallest canonical field containing both canonical fields.
pub fn compositum(
    a: &Arc<FieldDescriptor>,
    b: &Arc<FieldDescriptor>,
) -> Result<Arc<FieldDescriptor>, FieldError> {
    if a.p() != b.p() {
        return Err(FieldError::CharacteristicMismatch(a.p(), b.p()));
    }
    let k = num_integer::lcm(a.degree(), b.degree());
    FieldDescriptor::canonical(a.p(), k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f2_into_f4_fixes_one() {
        let f2 = FieldDescriptor::new(2, 1, None).unwrap();
        let f4 = FieldDescriptor::new(2, 2, Some(vec![1, 1, 1])).unwrap();
        let m = fq_embed(&f2, &f4).unwrap();
        assert_eq!(m.apply(&FqElement::one(&f2)), FqElement::one(&f4));
    }

    #[test]
    fn f4_into_f16_image_is_root() {
        let f4 = FieldDescriptor::new(2, 2, Some(vec![1, 1, 1])).unwrap();
        let f16 = FieldDescriptor::new(2, 4, None).unwrap();
        let m = fq_embed(&f4, &f16).unwrap();
        let g = m.image_of_generator().code();
        // brute force: g is a root of x^2 + x + 1 and the smallest one
        let roots: Vec<u32> = (0..16)
            .filter(|&z| f16.add(f16.add(f16.mul(z, z), z), 1) == 0)
            .collect();
        assert_eq!(roots.len(), 2);
        assert_eq!(g, roots[0]);
    }

    #[test]
    fn f4_into_f8_fails() {
        let f4 = FieldDescriptor::new(2, 2, None).unwrap();
        let f8 = FieldDescriptor::new(2, 3, None).unwrap();
        assert_eq!(
            fq_embed(&f4, &f8).unwrap_err(),
            FieldError::NoEmbedding { src: 2, dst: 3 }
        );
    }

    #[test]
    fn canonical_inclusions_commute() {
        for (p, d, j, k) in [
            (2u32, 1u32, 2u32, 4u32),
            (2, 2, 4, 8),
            (3, 1, 2, 4),
            (2, 2, 6, 12),
        ] {
            let fd = FieldDescriptor::canonical(p, d).unwrap();
            let fj = FieldDescriptor::canonical(p, j).unwrap();
            let fk = FieldDescriptor::canonical(p, k).unwrap();
            let dj = canonical_inclusion(&fd, &fj).unwrap();
            let jk = canonical_inclusion(&fj, &fk).unwrap();
            let dk = canonical_inclusion(&fd, &fk).unwrap();
            for c in 0..fd.size() {
                assert_eq!(
                    jk.apply_code(dj.apply_code(c)),
                    dk.apply_code(c),
                    "p={p} {d}->{j}->{k}"
                );
            }
        }
    }

    #[test]
    fn embeddings_are_homomorphisms() {
        let f4 = FieldDescriptor::new(2, 2, Some(vec![1, 1, 1])).unwrap();
        let f16 = FieldDescriptor::canonical(2, 4).unwrap();
        let m = fq_embed(&f4, &f16).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(
                    m.apply_code(f4.add(a, b)),
                    f16.add(m.apply_code(a), m.apply_code(b))
                );
                assert_eq!(
                    m.apply_code(f4.mul(a, b)),
                    f16.mul(m.apply_code(a), m.apply_code(b))
                );
            }
        }
        assert_eq!(m.apply_code(1), 1);
    }
}
