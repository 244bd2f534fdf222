#pragma once

// Conformal-factor generators and surgeries on triangle meshes: flattening a
// density near a point, gluing two surfaces along small disks, attaching a
// thin handle, and collapsing one glued component.

#include "confspec/json_io.hpp"
#include "confspec/mesh.hpp"
#include "confspec/spectral.hpp"

#include <filesystem>
#include <functional>
#include <unordered_map>
#include <vector>

namespace confspec::constructions {

inline constexpr int kDefaultRingVertices = 16;
inline constexpr double kRingGrowth = 1.35;

// ---- conformal factors -----------------------------------------------------

/// Round-sphere factor in stereographic coordinates: 4 / (1 + |x|^2)^2.
double stereographic_factor(const Vec2& x);

/// eps(R) = 2R / (1 + R^2): radius of the flat disk produced by the cap metric.
double cap_epsilon(double R);

struct CapSpec {
    double R = 1.0;           // cap parameter, > 0
    double rho_target = 1.0;  // radius, in x, where the flat region begins
    /// Optional conformal profile f on the sphere chart; f^2 multiplies the inner
    /// branch. Must equal 1 for |x| >= R. Empty means f = 1.
    std::function<double(const Vec2&)> profile;

    double epsilon() const { return cap_epsilon(R); }
};

/// Factor of the rescaled cap metric at x. With rho_target = R and no profile this
/// is 4/(1+|x|^2)^2 inside |x| <= R and 4R^4/((1+R^2)^2 |x|^4) outside.
double cap_metric_factor(const Vec2& x, const CapSpec& spec);

// ---- local charts ----------------------------------------------------------

/// Planar layout of the vertices near a center vertex whose edge lengths best
/// match the mesh's intrinsic lengths (least-squares stress). The center sits at
/// the origin and the layout has the mesh's orientation.
struct LocalChart {
    int center = -1;
    std::vector<int> vertices;
    std::vector<Vec2> coords;
    std::unordered_map<int, int> index;  // mesh vertex -> position in vertices
    double stress = 0.0;                 // RMS relative edge-length mismatch

    bool contains(int v) const { return index.count(v) != 0; }
    const Vec2& at(int v) const { return coords[index.at(v)]; }
};

LocalChart build_local_chart(const TriangleMesh& mesh, int center, double radius);

// ---- flattening ------------------------------------------------------------

struct FlattenResult {
    ConformalDensity density;
    double delta = 0.0;          // (1 + delta)^-2 <= rho'/rho <= (1 + delta)^2
    double max_log_slope = 0.0;  // max |d log rho'| / edge length over changed edges
    int inner_vertices = 0;      // vertices set to the center value
};

/// Constant density rho(vertex) within geodesic distance radius, the original
/// density beyond radius + width, and a smooth blend of log rho in between.
/// Throws GuardError if the ball of radius + width is not a topological disk.
FlattenResult flatten_density_near(const TriangleMesh& mesh, const ConformalDensity& density, int vertex,
                                   double radius, double width);

// ---- surgery ---------------------------------------------------------------

struct SurgeryResult {
    TriangleMesh mesh;
    ConformalDensity density;
    std::vector<int> component_labels;  // 0 = host side, 1 = guest or handle
    std::vector<int> seam_vertices;     // identified neck rings
    int genus = 0;
    Json spec;
    std::vector<std::string> warnings;
};

struct GlueSpec {
    TriangleMesh host;
    ConformalDensity host_density;
    int host_center = 0;
    TriangleMesh guest;
    ConformalDensity guest_density;
    int guest_center = 0;
    double epsilon = 0.1;
    int ring_vertices = kDefaultRingVertices;
};

/// Removes a disk of radius epsilon around each center and identifies the two
/// boundary circles (z -> epsilon^2 / z in the local charts).
SurgeryResult glue_surfaces(const GlueSpec& spec);

/// Removes disks of radius epsilon around a and b and joins them with a flat
/// cylinder of radius epsilon and the given length.
SurgeryResult attach_handle(const TriangleMesh& mesh, const ConformalDensity& density, int a, int b,
                            double epsilon, double length, int ring_vertices = kDefaultRingVertices);

/// Density with the labelled component scaled by eps^2. Its two vertex rings
/// nearest the rest of the surface are blended geometrically (eps^(2/3),
/// eps^(4/3)); vertices outside the component keep their density.
ConformalDensity collapse_component(const SurgeryResult& surgery, int component, double eps);

/// OFF file plus a JSON sidecar (path + ".json") carrying labels, density,
/// genus, spec and the intrinsic face lengths.
void save_surgery(const SurgeryResult& result, const std::filesystem::path& off_path);
SurgeryResult load_surgery(const std::filesystem::path& off_path);

// ---- spectral oracles ------------------------------------------------------

/// Sorted multiset union of two spectra, truncated to count + 1 values.
std::vector<double> union_spectrum_oracle(const std::vector<double>& a, const std::vector<double>& b,
                                          int count);
/// Same on the (un-normalized) eigenvalues of two reports.
std::vector<double> union_spectrum_oracle(const SpectrumReport& a, const SpectrumReport& b, int count);

/// (m pi / l)^2 for m = 1..count.
std::vector<double> dirichlet_segment_spectrum(double length, int count);

}  // namespace confspec::constructions
