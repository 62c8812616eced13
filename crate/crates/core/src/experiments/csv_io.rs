//! CSV schemas. Every file starts with a header row naming the fields below;
//! lattice points are written as their `d` coordinates joined by `;`.
//!
//! * `slabs.csv`: `replica,slab,tau_start,tau_gap,displacement,distinct_points`
//! * `traps.csv`: `replica,x,axis,forward,strength,n_xx,n_xy,n_yx,n_yy,entries,occupation,delta_p`
//!   (`axis` is 1-based; `forward` means the partner is `x + e_axis`)
//! * series files: `series,x,value,lower,upper`

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::traps::TrapStats;
use crate::walk::SlabRecord;

pub fn encode_site(s: &Site, d: usize) -> String {
    s.coords(d).iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}

pub fn decode_site(text: &str) -> Result<Site> {
    let coords = text
        .split(';')
        .map(|c| c.trim().parse::<i32>().map_err(|e| Error::Config(format!("bad coordinate {c:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if coords.is_empty() || coords.len() > crate::MAX_DIM {
        return Err(Error::Config(format!("bad lattice point {text:?}")));
    }
    Ok(Site::from_coords(&coords))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabRow {
    pub replica: u32,
    pub slab: u32,
    pub tau_start: u64,
    pub tau_gap: u64,
    pub displacement: String,
    pub distinct_points: u64,
}

impl SlabRow {
    pub fn from_record(r: &SlabRecord, d: usize) -> Self {
        Self {
            replica: r.replica,
            slab: r.slab,
            tau_start: r.tau_start,
            tau_gap: r.tau_gap,
            displacement: encode_site(&r.displacement, d),
            distinct_points: r.distinct_points,
        }
    }

    pub fn to_record(&self) -> Result<SlabRecord> {
        Ok(SlabRecord {
            replica: self.replica,
            slab: self.slab,
            tau_start: self.tau_start,
            tau_gap: self.tau_gap,
            displacement: decode_site(&self.displacement)?,
            distinct_points: self.distinct_points,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapRow {
    pub replica: u32,
    pub x: String,
    pub axis: u32,
    pub forward: bool,
    pub strength: f64,
    pub n_xx: u32,
    pub n_xy: u32,
    pub n_yx: u32,
    pub n_yy: u32,
    pub entries: u32,
    pub occupation: u64,
    pub delta_p: u64,
}

impl TrapRow {
    pub fn from_stats(replica: u32, s: &TrapStats, d: usize) -> Self {
        let c = &s.config;
        Self {
            replica,
            x: encode_site(&s.first, d),
            axis: c.axis as u32 + 1,
            forward: c.forward,
            strength: s.trap.strength,
            n_xx: c.n_xx,
            n_xy: c.n_xy,
            n_yx: c.n_yx,
            n_yy: c.n_yy,
            entries: s.entries,
            occupation: s.occupation,
            delta_p: s.delta_p,
        }
    }

    pub fn n(&self) -> u32 {
        self.n_xx + self.n_xy + self.n_yx + self.n_yy
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub series: String,
    pub x: f64,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl SeriesRow {
    pub fn point(series: &str, x: f64, value: f64) -> Self {
        Self { series: series.into(), x, value, lower: value, upper: value }
    }

    pub fn band(series: &str, x: f64, value: f64, (lower, upper): (f64, f64)) -> Self {
        Self { series: series.into(), x, value, lower, upper }
    }
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// A CSV artifact of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum Table {
    Slabs(Vec<SlabRow>),
    Traps(Vec<TrapRow>),
    Series(Vec<SeriesRow>),
}

impl Table {
    pub fn write(&self, path: &Path) -> Result<()> {
        match self {
            Table::Slabs(r) => write_rows(path, r),
            Table::Traps(r) => write_rows(path, r),
            Table::Series(r) => write_rows(path, r),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Table::Slabs(r) => r.len(),
            Table::Traps(r) => r.len(),
            Table::Series(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sites_round_trip() {
        let s = Site::from_coords(&[3, -2, 0]);
        assert_eq!(encode_site(&s, 3), "3;-2;0");
        assert_eq!(decode_site("3;-2;0").unwrap(), s);
        assert!(decode_site("3;x").is_err());
        assert!(decode_site("").is_err());
    }

    #[test]
    fn rows_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let slab = SlabRecord {
            replica: 2,
            slab: 5,
            tau_start: 100,
            tau_gap: 17,
            displacement: Site::from_coords(&[1, 4, -3]),
            distinct_points: 12,
        };
        let rows = vec![SlabRow::from_record(&slab, 3)];
        let p = dir.path().join("slabs.csv");
        write_rows(&p, &rows).unwrap();
        let back: Vec<SlabRow> = read_rows(&p).unwrap();
        assert_eq!(back, rows);
        assert_eq!(back[0].to_record().unwrap(), slab);
        let header = std::fs::read_to_string(&p).unwrap();
        assert!(header.starts_with("replica,slab,tau_start,tau_gap,displacement,distinct_points\n"));

        let series = vec![SeriesRow::point("a", 1.0, 0.1), SeriesRow::band("b", 2.0, 0.25, (0.2, 0.3))];
        let p = dir.path().join("s.csv");
        Table::Series(series.clone()).write(&p).unwrap();
        assert_eq!(read_rows::<SeriesRow>(&p).unwrap(), series);
    }
}
