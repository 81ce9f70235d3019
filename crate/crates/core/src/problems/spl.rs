//! Five-objective software product line configuration.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::objective::{Direction, ObjectiveVector};
use crate::rng::SeededRng;
use crate::space::{Decision, DecisionSpace, Solution};

use super::feature_model::{
    count_violations, parse_feature_model, FeatureModel, Product, MOBILE_PHONE,
};
use super::Problem;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureAttributes {
    pub cost: f64,
    pub defects: u32,
    pub used_before: bool,
}

/// One attribute record per feature, in model order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductAttributes {
    records: Vec<FeatureAttributes>,
}

impl ProductAttributes {
    pub fn new(model: &FeatureModel, records: Vec<FeatureAttributes>) -> Result<Self> {
        if records.len() != model.len() {
            return Err(Error::param(format!(
                "{} attribute records for {} features",
                records.len(),
                model.len()
            )));
        }
        if let Some(r) = records
            .iter()
            .find(|r| !(r.cost.is_finite() && r.cost >= 0.0))
        {
            return Err(Error::param(format!(
                "cost {} must be finite and non-negative",
                r.cost
            )));
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[FeatureAttributes] {
        &self.records
    }

    /// Cost uniform in [5, 15], defects uniform in 0..=10, used before with
    /// probability 0.5.
    pub fn generate(model: &FeatureModel, rng: &mut SeededRng) -> Self {
        let records = (0..model.len())
            .map(|_| FeatureAttributes {
                cost: rng.random_range(5.0..=15.0),
                defects: rng.random_range(0..=10),
                used_before: rng.random_bool(0.5),
            })
            .collect();
        Self { records }
    }

    /// Reads `feature,cost,defects,used_before` rows. Every model feature
    /// needs exactly one row.
    pub fn read<R: Read>(model: &FeatureModel, reader: R, origin: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut slots: Vec<Option<FeatureAttributes>> = vec![None; model.len()];
        let bad = |row: usize, message: String| Error::Data {
            path: origin.to_string(),
            row,
            message,
        };
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 2;
            let rec = rec?;
            if rec.len() != 4 {
                return Err(bad(row, format!("expected 4 columns, found {}", rec.len())));
            }
            let f = model
                .index_of(&rec[0])
                .ok_or_else(|| bad(row, format!("unknown feature `{}`", &rec[0])))?;
            let cost: f64 = rec[1]
                .parse()
                .map_err(|_| bad(row, format!("bad cost `{}`", &rec[1])))?;
            let defects: u32 = rec[2]
                .parse()
                .map_err(|_| bad(row, format!("bad defects `{}`", &rec[2])))?;
            let used_before = match &rec[3] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(bad(
                        row,
                        format!("used_before must be 0 or 1, got `{other}`"),
                    ))
                }
            };
            if slots[f].is_some() {
                return Err(bad(row, format!("duplicate record for `{}`", &rec[0])));
            }
            slots[f] = Some(FeatureAttributes {
                cost,
                defects,
                used_before,
            });
        }
        let records = slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or_else(|| {
                    Error::param(format!(
                        "missing attribute record for `{}`",
                        model.names()[i]
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(model, records)
    }

    pub fn read_file(model: &FeatureModel, path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(model, file, &path.display().to_string())
    }

    pub fn write<W: Write>(&self, model: &FeatureModel, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(["feature", "cost", "defects", "used_before"])?;
        for (name, r) in model.names().iter().zip(&self.records) {
            w.write_record([
                name.clone(),
                r.cost.to_string(),
                r.defects.to_string(),
                u8::from(r.used_before).to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<attributes>", e))?;
        Ok(())
    }
}

/// Objectives, canonical directions in brackets: violations (min), selected
/// features (max), known defects (min), total cost (min), features used
/// before (max). Invalid products are not repaired.
#[derive(Debug, Clone)]
pub struct SplProblem {
    name: String,
    model: FeatureModel,
    attrs: ProductAttributes,
    space: DecisionSpace,
    directions: [Direction; 5],
}

impl SplProblem {
    pub fn new(
        name: impl Into<String>,
        model: FeatureModel,
        attrs: ProductAttributes,
    ) -> Result<Self> {
        if attrs.records.len() != model.len() {
            return Err(Error::param("attributes do not cover every feature"));
        }
        let space = DecisionSpace::new(
            model
                .names()
                .iter()
                .map(|n| Decision::boolean(n.clone()))
                .collect(),
        )?;
        Ok(Self {
            name: name.into(),
            model,
            attrs,
            space,
            directions: [
                Direction::Minimize,
                Direction::Maximize,
                Direction::Minimize,
                Direction::Minimize,
                Direction::Maximize,
            ],
        })
    }

    pub fn model(&self) -> &FeatureModel {
        &self.model
    }

    pub fn attributes(&self) -> &ProductAttributes {
        &self.attrs
    }

    pub fn product_of(&self, solution: &Solution) -> Result<Product> {
        self.space.validate(solution)?;
        Ok(Product::new(
            solution
                .values
                .iter()
                .map(|v| v.as_bool().unwrap_or(false))
                .collect(),
        ))
    }
}

impl Problem for SplProblem {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn space(&self) -> &DecisionSpace {
        &self.space
    }

    fn directions(&self) -> &[Direction] {
        &self.directions
    }

    fn evaluate(&self, solution: &Solution) -> Result<ObjectiveVector> {
        let product = self.product_of(solution)?;
        let violations = count_violations(&self.model, &product)?;
        let (mut selected, mut defects, mut cost, mut reused) = (0usize, 0u64, 0.0, 0usize);
        for (on, r) in product.selection.iter().zip(&self.attrs.records) {
            if *on {
                selected += 1;
                defects += u64::from(r.defects);
                cost += r.cost;
                reused += usize::from(r.used_before);
            }
        }
        ObjectiveVector::new(
            vec![
                violations as f64,
                selected as f64,
                defects as f64,
                cost,
                reused as f64,
            ],
            self.directions.to_vec(),
        )
    }
}

/// The bundled mobile-phone model with attributes drawn from seed 0.
pub fn mobile_phone_problem() -> Result<SplProblem> {
    let model = parse_feature_model(MOBILE_PHONE)?;
    let attrs = ProductAttributes::generate(&model, &mut SeededRng::new(0));
    SplProblem::new("spl:mobile_phone", model, attrs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem() -> SplProblem {
        mobile_phone_problem().unwrap()
    }

    #[test]
    fn empty_selection() {
        let p = problem();
        let o = p.evaluate(&Solution::bits(vec![false; 10])).unwrap();
        assert!(o.raw(0) >= 1.0);
        assert_eq!(&o.raw_values()[1..], &[0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn full_valid_selection_sums_attributes() {
        let p = problem();
        let m = p.model();
        let names = [
            "MobilePhone",
            "Calls",
            "GPS",
            "Screen",
            "Media",
            "Color",
            "Camera",
            "MP3",
        ];
        let product = Product::from_names(m, &names).unwrap();
        // Camera requires HighResolution, which conflicts with Color in the alt group
        assert_eq!(count_violations(m, &product).unwrap(), 1);
        let names = [
            "MobilePhone",
            "Calls",
            "GPS",
            "Screen",
            "Media",
            "HighResolution",
            "Camera",
            "MP3",
        ];
        let product = Product::from_names(m, &names).unwrap();
        assert_eq!(count_violations(m, &product).unwrap(), 0);
        let o = p
            .evaluate(&Solution::bits(product.selection.clone()))
            .unwrap();
        let (mut cost, mut defects, mut reused) = (0.0, 0.0, 0.0);
        for n in names {
            let r = &p.attributes().records()[m.index_of(n).unwrap()];
            cost += r.cost;
            defects += f64::from(r.defects);
            reused += f64::from(u8::from(r.used_before));
        }
        let raw = o.raw_values();
        assert_eq!(raw[0], 0.0);
        assert_eq!(raw[1], 8.0);
        assert_eq!(raw[2], defects);
        assert!((raw[3] - cost).abs() < 1e-12);
        assert_eq!(raw[4], reused);
        assert_eq!(o.canonical()[1], -8.0);
    }

    #[test]
    fn popcount_and_violations_objectives() {
        let p = problem();
        for code in 0u32..1024 {
            let bits: Vec<bool> = (0..10).map(|i| code & (1 << i) != 0).collect();
            let o = p.evaluate(&Solution::bits(bits.clone())).unwrap();
            assert_eq!(o.raw(1), f64::from(code.count_ones()));
            let v = count_violations(p.model(), &Product::new(bits)).unwrap();
            assert_eq!(o.raw(0), v as f64);
        }
    }

    #[test]
    fn attribute_csv_round_trip_and_errors() {
        let p = problem();
        let mut buf = Vec::new();
        p.attributes().write(p.model(), &mut buf).unwrap();
        let back = ProductAttributes::read(p.model(), buf.as_slice(), "mem").unwrap();
        assert_eq!(&back, p.attributes());
        for r in back.records() {
            assert!((5.0..=15.0).contains(&r.cost));
            assert!(r.defects <= 10);
        }

        let text = String::from_utf8(buf).unwrap();
        let missing: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(ProductAttributes::read(p.model(), missing.as_bytes(), "mem").is_err());
        let bad = "feature,cost,defects,used_before\nNope,1,1,1\n";
        assert!(ProductAttributes::read(p.model(), bad.as_bytes(), "mem").is_err());
    }
}
