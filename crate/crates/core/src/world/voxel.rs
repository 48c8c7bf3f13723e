use crate::geometry::Point3;

/// Observation state of a single voxel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Occupancy {
    Unknown = 0,
    Free = 1,
    Occupied = 2,
}

impl Occupancy {
    pub fn is_known(self) -> bool {
        self != Occupancy::Unknown
    }
}

/// Integer voxel coordinate. Signed so that neighbours of border voxels can be
/// expressed without wrapping.
pub type VoxelIndex = [i64; 3];

/// Dense ternary voxel grid.
///
/// Voxel `(i, j, k)` spans `origin + [i, i+1) * edge` along x (and likewise for
/// y/z). Used both for the immutable ground truth and for the robot's map.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelMap {
    origin: Point3,
    edge: f64,
    dims: [usize; 3],
    cells: Vec<Occupancy>,
    known: usize,
}

impl VoxelMap {
    /// A map of the given geometry with every voxel Unknown.
    pub fn new(origin: Point3, edge: f64, dims: [usize; 3]) -> Self {
        Self::filled(origin, edge, dims, Occupancy::Unknown)
    }

    pub fn filled(origin: Point3, edge: f64, dims: [usize; 3], state: Occupancy) -> Self {
        assert!(edge > 0.0, "voxel edge length must be positive");
        let n = dims[0] * dims[1] * dims[2];
        Self {
            origin,
            edge,
            dims,
            cells: vec![state; n],
            known: if state.is_known() { n } else { 0 },
        }
    }

    /// An all-Unknown map sharing this map's geometry.
    pub fn blank_like(&self) -> Self {
        Self::new(self.origin, self.edge, self.dims)
    }

    pub fn origin(&self) -> Point3 {
        self.origin
    }

    pub fn edge_length(&self) -> f64 {
        self.edge
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn in_bounds(&self, idx: VoxelIndex) -> bool {
        idx[0] >= 0
            && idx[1] >= 0
            && idx[2] >= 0
            && (idx[0] as usize) < self.dims[0]
            && (idx[1] as usize) < self.dims[1]
            && (idx[2] as usize) < self.dims[2]
    }

    #[inline]
    fn linear(&self, idx: VoxelIndex) -> usize {
        (idx[2] as usize * self.dims[1] + idx[1] as usize) * self.dims[0] + idx[0] as usize
    }

    /// State of a voxel; anything outside the map is Unknown.
    #[inline]
    pub fn get(&self, idx: VoxelIndex) -> Occupancy {
        if self.in_bounds(idx) {
            self.cells[self.linear(idx)]
        } else {
            Occupancy::Unknown
        }
    }

    /// Voxel containing a world-space point, whether or not it lies in the map.
    #[inline]
    pub fn voxel_of(&self, p: Point3) -> VoxelIndex {
        [
            ((p.x - self.origin.x) / self.edge).floor() as i64,
            ((p.y - self.origin.y) / self.edge).floor() as i64,
            ((p.z - self.origin.z) / self.edge).floor() as i64,
        ]
    }

    pub fn contains(&self, p: Point3) -> bool {
        self.in_bounds(self.voxel_of(p))
    }

    #[inline]
    pub fn state_at(&self, p: Point3) -> Occupancy {
        self.get(self.voxel_of(p))
    }

    pub fn voxel_center(&self, idx: VoxelIndex) -> Point3 {
        Point3::new(
            self.origin.x + (idx[0] as f64 + 0.5) * self.edge,
            self.origin.y + (idx[1] as f64 + 0.5) * self.edge,
            self.origin.z + (idx[2] as f64 + 0.5) * self.edge,
        )
    }

    /// World z of the top face of voxel layer `k`.
    pub fn layer_top(&self, k: i64) -> f64 {
        self.origin.z + (k + 1) as f64 * self.edge
    }

    /// Unconditional write; for building ground-truth maps.
    pub fn set(&mut self, idx: VoxelIndex, state: Occupancy) {
        assert!(self.in_bounds(idx), "voxel {idx:?} outside map");
        let li = self.linear(idx);
        let old = self.cells[li];
        self.cells[li] = state;
        match (old.is_known(), state.is_known()) {
            (false, true) => self.known += 1,
            (true, false) => self.known -= 1,
            _ => {}
        }
    }

    /// Records sensor evidence. Only Unknown→Free, Unknown→Occupied and
    /// Free→Occupied are applied; returns whether the voxel changed.
    pub fn observe(&mut self, idx: VoxelIndex, state: Occupancy) -> bool {
        if !self.in_bounds(idx) {
            return false;
        }
        let li = self.linear(idx);
        let old = self.cells[li];
        let apply = matches!(
            (old, state),
            (Occupancy::Unknown, Occupancy::Free)
                | (Occupancy::Unknown, Occupancy::Occupied)
                | (Occupancy::Free, Occupancy::Occupied)
        );
        if apply {
            if old == Occupancy::Unknown {
                self.known += 1;
            }
            self.cells[li] = state;
        }
        apply
    }

    /// Number of non-Unknown voxels.
    pub fn known_voxels(&self) -> usize {
        self.known
    }

    pub fn count(&self, state: Occupancy) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }

    pub fn mapped_volume(&self) -> f64 {
        self.known as f64 * self.edge.powi(3)
    }

    /// Iterates `(index, state)` over every voxel in x-fastest order.
    pub fn iter(&self) -> impl Iterator<Item = (VoxelIndex, Occupancy)> + '_ {
        let [nx, ny, _] = self.dims;
        self.cells.iter().enumerate().map(move |(li, &s)| {
            let i = li % nx;
            let j = (li / nx) % ny;
            let k = li / (nx * ny);
            ([i as i64, j as i64, k as i64], s)
        })
    }

    /// Walks the voxels pierced by the ray `origin + t * dir` (unit `dir`) in
    /// order, for entry distances `t < max_t`, calling `visit(index, t_entry)`
    /// until it returns `false` or the ray leaves the map. Exact grid traversal
    /// (Amanatides & Woo); no voxel on the ray is skipped.
    pub fn traverse_ray<F>(&self, origin: Point3, dir: [f64; 3], max_t: f64, mut visit: F)
    where
        F: FnMut(VoxelIndex, f64) -> bool,
    {
        let mut idx = self.voxel_of(origin);
        if !self.in_bounds(idx) {
            return;
        }
        let o = [
            (origin.x - self.origin.x) / self.edge,
            (origin.y - self.origin.y) / self.edge,
            (origin.z - self.origin.z) / self.edge,
        ];
        let mut step = [0i64; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for a in 0..3 {
            if dir[a] > 0.0 {
                step[a] = 1;
                t_max[a] = ((idx[a] + 1) as f64 - o[a]) * self.edge / dir[a];
                t_delta[a] = self.edge / dir[a];
            } else if dir[a] < 0.0 {
                step[a] = -1;
                t_max[a] = (idx[a] as f64 - o[a]) * self.edge / dir[a];
                t_delta[a] = -self.edge / dir[a];
            }
        }
        let mut t_entry = 0.0;
        loop {
            if !visit(idx, t_entry) {
                return;
            }
            let a = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
                0
            } else if t_max[1] <= t_max[2] {
                1
            } else {
                2
            };
            t_entry = t_max[a];
            if t_entry >= max_t {
                return;
            }
            idx[a] += step[a];
            if idx[a] < 0 || idx[a] as usize >= self.dims[a] {
                return;
            }
            t_max[a] += t_delta[a];
        }
    }
}

/// Mapped volume in m³: known voxels times the voxel volume.
pub fn mapped_volume(map: &VoxelMap) -> f64 {
    map.mapped_volume()
}
