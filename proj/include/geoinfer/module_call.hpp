#pragma once

#include <array>
#include <optional>
#include <string>
#include <tuple>

namespace geoinfer {

enum class ModuleFamily {
    get_address,
    get_area,
    get_night_light,
    count_area,
    get_distance_to_nearest_target,
    get_aggregate_neighbor_info,
};

inline constexpr std::array<const char*, 8> kLandcoverClasses = {
    "bareland", "rangeland", "development", "road",
    "tree",     "water",     "agricultural", "building"};

inline constexpr std::array<const char*, 2> kTargetClasses = {"airport", "port"};

// One selected module invocation. Neighbor aggregation wraps exactly one
// inner call, so it is stored flat: `neighbor` marks the wrapping and
// family/class_arg describe the inner call. A wrapped call is a distinct
// call identity (neighbor(count_area:road) != count_area:road) for voting,
// tables and caching.
struct ModuleCall {
    ModuleFamily family = ModuleFamily::get_address;
    std::string class_arg;  // landcover class or target class, when required
    bool neighbor = false;

    friend bool operator==(const ModuleCall& a, const ModuleCall& b) {
        return a.family == b.family && a.class_arg == b.class_arg && a.neighbor == b.neighbor;
    }
    friend bool operator<(const ModuleCall& a, const ModuleCall& b) {
        return std::tie(a.neighbor, a.family, a.class_arg) <
               std::tie(b.neighbor, b.family, b.class_arg);
    }
};

std::string family_name(ModuleFamily family);
std::optional<ModuleFamily> family_from_name(const std::string& name);

bool is_landcover_class(const std::string& cls);
bool is_target_class(const std::string& cls);

// Stable textual identity: "get_area", "count_area:development",
// "neighbor(get_night_light)".
std::string call_id(const ModuleCall& call);
std::optional<ModuleCall> call_from_id(const std::string& id);

// Human-readable form used in diagnostics, e.g.
// "get_aggregate_neighbor_info(count_area:building)".
std::string call_display(const ModuleCall& call);

// Throws ValidationError when the class argument is missing/unknown or the
// wrapping constraint is violated (no neighbor-of-neighbor, no
// neighbor-of-address).
void validate_call(const ModuleCall& call);

}  // namespace geoinfer
