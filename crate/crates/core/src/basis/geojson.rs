//! Areal units from GeoJSON `Polygon` / `MultiPolygon` features.
//!
//! Coordinates are used as planar `(x, y)` as given; longitude/latitude input
//! is not projected.

use std::str::FromStr;

use geojson::{GeoJson, Value};

use crate::error::{Error, Result};
use crate::geometry::{AreaUnit, Point, Polygon};
use crate::scalar::Real;

fn ring<T: Real>(coords: &[Vec<f64>]) -> Result<Vec<Point<T>>> {
    coords
        .iter()
        .map(|p| match p.as_slice() {
            [x, y, ..] => Ok([T::of(*x), T::of(*y)]),
            _ => Err(Error::Geometry("position needs at least two coordinates".into())),
        })
        .collect()
}

fn polygon<T: Real>(rings: &[Vec<Vec<f64>>]) -> Result<Polygon<T>> {
    let (ext, holes) = rings.split_first().ok_or_else(|| Error::Geometry("polygon without rings".into()))?;
    Ok(Polygon { exterior: ring(ext)?, holes: holes.iter().map(|h| ring(h)).collect::<Result<_>>()? })
}

/// Reads every feature of a FeatureCollection as one areal unit. The unit id
/// comes from property `id_property` if given and present, else the feature
/// id, else the feature's position in the collection.
pub fn read_geojson_units<T: Real>(text: &str, id_property: Option<&str>) -> Result<Vec<AreaUnit<T>>> {
    let gj = GeoJson::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let GeoJson::FeatureCollection(fc) = gj else {
        return Err(Error::Geometry("expected a FeatureCollection".into()));
    };
    let mut units = Vec::with_capacity(fc.features.len());
    for (k, f) in fc.features.iter().enumerate() {
        let id = id_property
            .and_then(|p| f.property(p))
            .map(|v| v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string()))
            .or_else(|| {
                f.id.as_ref().map(|id| match id {
                    geojson::feature::Id::String(s) => s.clone(),
                    geojson::feature::Id::Number(n) => n.to_string(),
                })
            })
            .unwrap_or_else(|| k.to_string());
        let geom = f.geometry.as_ref().ok_or_else(|| Error::Geometry(format!("feature {id} has no geometry")))?;
        let polys = match &geom.value {
            Value::Polygon(rings) => vec![polygon(rings)?],
            Value::MultiPolygon(ps) => ps.iter().map(|p| polygon(p)).collect::<Result<_>>()?,
            _ => return Err(Error::Geometry(format!("feature {id}: only Polygon and MultiPolygon are supported"))),
        };
        units.push(AreaUnit::new(id, polys)?);
    }
    if units.is_empty() {
        return Err(Error::Geometry("FeatureCollection has no features".into()));
    }
    Ok(units)
}
