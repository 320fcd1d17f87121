#pragma once

#include <map>
#include <string>
#include <vector>

#include "geoinfer/geo.hpp"

namespace geoinfer {

enum class RasterKind { intensity, categorical };

// ESRI ASCII grid in memory. Cells are row-major with row 0 the
// northernmost, matching the on-disk layout.
struct Raster {
    int ncols = 0;
    int nrows = 0;
    double xllcorner = 0.0;
    double yllcorner = 0.0;
    double cellsize = 0.0;
    double nodata_value = -9999.0;
    std::vector<double> cells;
    RasterKind kind = RasterKind::intensity;

    double at(int row, int col) const { return cells[static_cast<std::size_t>(row) * ncols + col]; }
    double& at(int row, int col) { return cells[static_cast<std::size_t>(row) * ncols + col]; }

    geo::LonLat cell_center(int row, int col) const {
        return {xllcorner + (col + 0.5) * cellsize,
                yllcorner + (nrows - row - 0.5) * cellsize};
    }

    bool is_nodata(double v) const { return v == nodata_value; }
};

Raster load_ascii_grid(const std::string& path, RasterKind kind);
void save_ascii_grid(const std::string& path, const Raster& r);

// Sidecar legend for categorical rasters: integer code -> class name.
// Codes naming the "nodata" class are folded into the grid nodata value by
// remap_legend_nodata.
struct Legend {
    std::map<int, std::string> code_to_name;

    // -1 when the name is absent
    int code_for(const std::string& name) const;
};

Legend load_legend(const std::string& path);
void save_legend(const std::string& path, const Legend& legend);
void remap_legend_nodata(Raster& r, const Legend& legend);

struct ZonalStats {
    double sum = 0.0;
    double mean = 0.0;
    long valid_cell_count = 0;
    bool warning = false;  // zero overlapping valid cells
};

struct ClassRatio {
    double ratio = 0.0;
    long class_cells = 0;
    long valid_cells = 0;
    bool warning = false;
};

// Production kernels: scanline span extraction per raster row, rows run
// under OpenMP; per-row partials are reduced in row order so results do not
// depend on the thread count. Cells count when their center lies inside the
// geometry; nodata cells are excluded.
ZonalStats zonal_stats(const Raster& r, const geo::Geometry& g);
ClassRatio class_ratio(const Raster& r, const geo::Geometry& g, int class_code);

namespace serial {

// Brute-force per-cell reference implementations, kept as the test oracle
// and benchmark baseline.
ZonalStats zonal_stats(const Raster& r, const geo::Geometry& g);
ClassRatio class_ratio(const Raster& r, const geo::Geometry& g, int class_code);

}  // namespace serial

}  // namespace geoinfer
