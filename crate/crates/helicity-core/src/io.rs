//! Binary containers for fields and layer stacks: little-endian f64 payloads
//! behind a small self-describing header.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::halfspace::HalfSpaceField;
use crate::lie::LieField;
use crate::sgrid::SGrid;

const FIELD_MAGIC: &[u8; 4] = b"HLF1";
const STACK_MAGIC: &[u8; 4] = b"HLS1";

pub fn write_lie_field<P: AsRef<Path>>(path: P, f: &LieField) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(FIELD_MAGIC)?;
    write_field_body(&mut w, f)?;
    Ok(())
}

fn write_field_body<W: Write>(w: &mut W, f: &LieField) -> Result<()> {
    let grid = f.grid();
    w.write_u32::<LittleEndian>(f.degree() as u32)?;
    w.write_u32::<LittleEndian>(grid.n() as u32)?;
    w.write_f64::<LittleEndian>(grid.length())?;
    for c in 0..f.ncomp() {
        for a in 0..3 {
            for v in f.comp(c, a).iter() {
                w.write_f64::<LittleEndian>(*v)?;
            }
        }
    }
    Ok(())
}

pub fn read_lie_field<P: AsRef<Path>>(path: P) -> Result<LieField> {
    let file = File::open(path)?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Format("not a field container".into()));
    }
    read_field_body(&mut r)
}

fn read_field_body<R: Read>(r: &mut R) -> Result<LieField> {
    let degree = r.read_u32::<LittleEndian>()? as usize;
    let n = r.read_u32::<LittleEndian>()? as usize;
    let l = r.read_f64::<LittleEndian>()?;
    let grid = TorusGrid::new(n, l)?;
    let mut f = LieField::zeros(grid, degree)?;
    for c in 0..f.ncomp() {
        for a in 0..3 {
            for v in f.comp_mut(c, a).iter_mut() {
                *v = r.read_f64::<LittleEndian>()?;
            }
        }
    }
    Ok(f)
}

pub fn write_stack<P: AsRef<Path>>(path: P, stack: &HalfSpaceField) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(STACK_MAGIC)?;
    w.write_u32::<LittleEndian>(stack.layers().len() as u32)?;
    w.write_u32::<LittleEndian>(if stack.derivative_layers().is_some() {
        1
    } else {
        0
    })?;
    for &s in stack.s_grid().points() {
        w.write_f64::<LittleEndian>(s)?;
    }
    for layer in stack.layers() {
        write_field_body(&mut w, layer)?;
    }
    if let Some(dl) = stack.derivative_layers() {
        for layer in dl {
            write_field_body(&mut w, layer)?;
        }
    }
    Ok(())
}

pub fn read_stack<P: AsRef<Path>>(path: P) -> Result<HalfSpaceField> {
    let file = File::open(path)?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != STACK_MAGIC {
        return Err(Error::Format("not a stack container".into()));
    }
    let m = r.read_u32::<LittleEndian>()? as usize;
    let has_d = r.read_u32::<LittleEndian>()? == 1;
    let mut pts = Vec::with_capacity(m);
    for _ in 0..m {
        pts.push(r.read_f64::<LittleEndian>()?);
    }
    let s = SGrid::from_points(pts)?;
    let mut layers = Vec::with_capacity(m);
    for _ in 0..m {
        layers.push(read_field_body(&mut r)?);
    }
    let stack = HalfSpaceField::new(s, layers)?;
    if has_d {
        let mut dlayers = Vec::with_capacity(m);
        for _ in 0..m {
            dlayers.push(read_field_body(&mut r)?);
        }
        stack.with_derivatives(dlayers)
    } else {
        Ok(stack)
    }
}
