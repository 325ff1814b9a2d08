#include "spine/spine_config.hpp"

#include <Eigen/Dense>
#include <sstream>

namespace spine {

namespace {

Vec make_vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

SpineConfig planar_default() {
  SpineConfig c;
  c.dimension = Dimension::planar2d;
  c.num_moving_vertebrae = 1;
  c.vertebra_mass = 0.5;
  c.vertebra_inertia = make_vec({2e-3});
  c.vertebra_height = 0.15;
  // Up tips at +-x, down tips at +-x; up tips of the lower body sit above
  // the down tips of the upper body (0.10 > h/2).
  c.node_offsets = {make_vec({-0.075, 0.10}), make_vec({0.075, 0.10}),
                    make_vec({-0.075, -0.10}), make_vec({0.075, -0.10})};
  // Two vertical cables (up tip -> down tip, same side) and two crossing
  // saddle cables.
  c.cable_routing = {{0, 2}, {1, 3}, {0, 3}, {1, 2}};
  c.cable_stiffness = 500.0;
  c.cable_damping = 10.0;
  c.gravity = 9.81;
  c.dt = 0.001;
  return c;
}

SpineConfig spatial_default() {
  SpineConfig c;
  c.dimension = Dimension::spatial3d;
  c.num_moving_vertebrae = 3;
  c.vertebra_mass = 0.5;
  c.vertebra_inertia = make_vec({2e-3, 2e-3, 2e-3});
  c.vertebra_height = 0.15;
  // Tetrahedron tips: two up tips along +-x, two down tips along +-y.
  c.node_offsets = {make_vec({0.075, 0.0, 0.10}), make_vec({-0.075, 0.0, 0.10}),
                    make_vec({0.0, 0.075, -0.10}), make_vec({0.0, -0.075, -0.10})};
  // Four vertical cables tie matching tips of consecutive vertebrae; four
  // saddle cables run from the lower body's up tips to the upper body's
  // down tips and carry the weight.
  c.cable_routing = {{0, 0}, {1, 1}, {2, 2}, {3, 3},
                     {0, 2}, {0, 3}, {1, 2}, {1, 3}};
  c.cable_stiffness = 500.0;
  c.cable_damping = 10.0;
  c.gravity = 9.81;
  c.dt = 0.001;
  return c;
}

void SpineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("spine config: " + msg); };

  if (num_moving_vertebrae < 1) fail("num_moving_vertebrae must be >= 1");
  if (!(dt > 0)) fail("dt must be > 0");
  if (!(cable_stiffness > 0)) fail("cable_stiffness must be > 0");
  if (cable_damping < 0) fail("cable_damping must be >= 0");
  if (!(vertebra_mass > 0)) fail("vertebra_mass must be > 0");
  if (!(vertebra_height > 0)) fail("vertebra_height must be > 0");
  if (gravity < 0) fail("gravity must be >= 0");

  const int wd = workspace_dim();
  const int expected_inertia = dimension == Dimension::planar2d ? 1 : 3;
  if (vertebra_inertia.size() != expected_inertia)
    fail("vertebra_inertia needs " + std::to_string(expected_inertia) + " entries");
  if (vertebra_inertia.minCoeff() <= 0) fail("vertebra_inertia must be > 0");

  const int expected_cables = dimension == Dimension::planar2d ? 4 : 8;
  if (cables_per_pair() != expected_cables)
    fail("expected " + std::to_string(expected_cables) + " cables per vertebra pair, got " +
         std::to_string(cables_per_pair()));

  if (node_offsets.size() < 2) fail("need at least two attachment nodes");
  Mat offsets(static_cast<int>(node_offsets.size()), wd);
  for (size_t i = 0; i < node_offsets.size(); ++i) {
    if (node_offsets[i].size() != wd)
      fail("node offset " + std::to_string(i) + " has wrong dimension");
    if (node_offsets[i].norm() == 0.0) fail("node offsets must be nonzero");
    offsets.row(static_cast<int>(i)) = node_offsets[i].transpose();
  }
  // Cables must be able to exert restoring moments: offsets not all collinear.
  Eigen::FullPivLU<Mat> lu(offsets);
  if (lu.rank() < 2) fail("node offsets are collinear");

  for (const auto& [lo, hi] : cable_routing) {
    if (lo < 0 || hi < 0 || lo >= static_cast<int>(node_offsets.size()) ||
        hi >= static_cast<int>(node_offsets.size()))
      fail("cable routing references a node that does not exist");
  }
}

SpineConfig read_spine_section(const ConfigDoc& doc) {
  const ConfigSection* section = doc.find_section("spine");
  if (!section) throw ConfigError(doc.source, "missing [spine] section");
  SectionReader r(doc, *section);

  std::string dim = r.get_word("dimension", "planar2d");
  SpineConfig c;
  if (dim == "planar2d") {
    c = planar_default();
  } else if (dim == "spatial3d") {
    c = spatial_default();
  } else {
    throw ConfigError(r.location("dimension"),
                      "dimension must be planar2d or spatial3d, got '" + dim + "'");
  }

  c.num_moving_vertebrae = r.get_int("num_moving_vertebrae", c.num_moving_vertebrae);
  c.vertebra_mass = r.get_double("vertebra_mass", c.vertebra_mass);
  c.vertebra_height = r.get_double("vertebra_height", c.vertebra_height);
  c.cable_stiffness = r.get_double("cable_stiffness", c.cable_stiffness);
  c.cable_damping = r.get_double("cable_damping", c.cable_damping);
  c.gravity = r.get_double("gravity", c.gravity);
  c.dt = r.get_double("dt", c.dt);

  if (r.has("vertebra_inertia")) {
    auto v = r.get_array("vertebra_inertia");
    c.vertebra_inertia = Eigen::Map<const Vec>(v.data(), static_cast<int>(v.size()));
  }
  if (r.has("node_offsets")) {
    auto rows = r.get_rows("node_offsets");
    c.node_offsets.clear();
    for (const auto& row : rows)
      c.node_offsets.push_back(Eigen::Map<const Vec>(row.data(), static_cast<int>(row.size())));
  }
  if (r.has("cable_routing")) {
    auto rows = r.get_rows("cable_routing");
    c.cable_routing.clear();
    for (const auto& row : rows) {
      if (row.size() != 2)
        throw ConfigError(r.location("cable_routing"), "each routing row needs 2 node indices");
      c.cable_routing.emplace_back(static_cast<int>(row[0]), static_cast<int>(row[1]));
    }
  }

  r.finish();
  c.validate();
  return c;
}

std::string write_spine_section(const SpineConfig& c) {
  std::ostringstream out;
  out << "[spine]\n";
  out << "dimension = " << to_string(c.dimension) << "\n";
  out << "num_moving_vertebrae = " << c.num_moving_vertebrae << "\n";
  out << "vertebra_mass = " << format_double(c.vertebra_mass) << "\n";
  std::vector<double> inertia(c.vertebra_inertia.data(),
                              c.vertebra_inertia.data() + c.vertebra_inertia.size());
  out << "vertebra_inertia = " << format_array(inertia) << "\n";
  out << "vertebra_height = " << format_double(c.vertebra_height) << "\n";
  std::vector<std::vector<double>> offsets;
  for (const auto& o : c.node_offsets)
    offsets.emplace_back(o.data(), o.data() + o.size());
  out << "node_offsets = " << format_rows(offsets) << "\n";
  std::vector<std::vector<double>> routing;
  for (const auto& [lo, hi] : c.cable_routing)
    routing.push_back({static_cast<double>(lo), static_cast<double>(hi)});
  out << "cable_routing = " << format_rows(routing) << "\n";
  out << "cable_stiffness = " << format_double(c.cable_stiffness) << "\n";
  out << "cable_damping = " << format_double(c.cable_damping) << "\n";
  out << "gravity = " << format_double(c.gravity) << "\n";
  out << "dt = " << format_double(c.dt) << "\n";
  return out.str();
}

}  // namespace spine
