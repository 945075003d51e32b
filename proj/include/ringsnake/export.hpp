#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>

#include "ringsnake/diagram.hpp"
#include "ringsnake/verify.hpp"

namespace ringsnake {

nlohmann::json to_json(const RingModel& model);
RingModel model_from_json(const nlohmann::json& j);

/// Diagram document: model, branches with points and events, summary.
/// Doubles are written in shortest round-trip form.
nlohmann::json to_json(const Diagram& diagram);

/// Rebuilds branches, points and events; tangents are not stored and come
/// back empty, reduced coordinates are recomputed from the stored reduction.
Diagram diagram_from_json(const nlohmann::json& j);

std::string export_json(const Diagram& diagram);
/// Rows: branch_id, point_index, mu, l2norm, stability, label.
std::string export_csv(const Diagram& diagram);

struct SvgStyle {
  int width = 800;
  int height = 600;
  int margin = 60;
  double marker = 4.0;
  double stroke = 1.2;
};

/// mu against the l2-norm of U. Folds are dots, branch points crosses, label
/// stops squares; homogeneous branches are dotted.
std::string render_svg(const Diagram& diagram, const SvgStyle& style = {});

nlohmann::json to_json(const VerificationReport& report);

/// Writes through a temporary file in the same directory and renames it
/// into place. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace ringsnake
