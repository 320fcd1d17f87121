#include "geoinfer/module_call.hpp"

#include <algorithm>

#include "geoinfer/errors.hpp"

namespace geoinfer {

std::string family_name(ModuleFamily family) {
    switch (family) {
        case ModuleFamily::get_address: return "get_address";
        case ModuleFamily::get_area: return "get_area";
        case ModuleFamily::get_night_light: return "get_night_light";
        case ModuleFamily::count_area: return "count_area";
        case ModuleFamily::get_distance_to_nearest_target:
            return "get_distance_to_nearest_target";
        case ModuleFamily::get_aggregate_neighbor_info:
            return "get_aggregate_neighbor_info";
    }
    return "?";
}

std::optional<ModuleFamily> family_from_name(const std::string& name) {
    for (ModuleFamily f : {ModuleFamily::get_address, ModuleFamily::get_area,
                           ModuleFamily::get_night_light, ModuleFamily::count_area,
                           ModuleFamily::get_distance_to_nearest_target,
                           ModuleFamily::get_aggregate_neighbor_info}) {
        if (family_name(f) == name) return f;
    }
    return std::nullopt;
}

bool is_landcover_class(const std::string& cls) {
    return std::find(kLandcoverClasses.begin(), kLandcoverClasses.end(), cls) !=
           kLandcoverClasses.end();
}

bool is_target_class(const std::string& cls) {
    return std::find(kTargetClasses.begin(), kTargetClasses.end(), cls) != kTargetClasses.end();
}

std::string call_id(const ModuleCall& call) {
    std::string inner = family_name(call.family);
    if (!call.class_arg.empty()) inner += ":" + call.class_arg;
    return call.neighbor ? "neighbor(" + inner + ")" : inner;
}

std::optional<ModuleCall> call_from_id(const std::string& id) {
    ModuleCall call;
    std::string body = id;
    if (body.rfind("neighbor(", 0) == 0 && body.back() == ')') {
        call.neighbor = true;
        body = body.substr(9, body.size() - 10);
    }
    const auto colon = body.find(':');
    const std::string fam = colon == std::string::npos ? body : body.substr(0, colon);
    const auto family = family_from_name(fam);
    if (!family) return std::nullopt;
    call.family = *family;
    if (colon != std::string::npos) call.class_arg = body.substr(colon + 1);
    try {
        validate_call(call);
    } catch (const ValidationError&) {
        return std::nullopt;
    }
    return call;
}

std::string call_display(const ModuleCall& call) {
    std::string inner = family_name(call.family);
    if (!call.class_arg.empty()) inner += ":" + call.class_arg;
    return call.neighbor ? "get_aggregate_neighbor_info(" + inner + ")" : inner;
}

void validate_call(const ModuleCall& call) {
    switch (call.family) {
        case ModuleFamily::get_address:
            if (call.neighbor) {
                throw ValidationError("get_address cannot be aggregated over neighbors");
            }
            [[fallthrough]];
        case ModuleFamily::get_area:
        case ModuleFamily::get_night_light:
            if (!call.class_arg.empty()) {
                throw ValidationError(family_name(call.family) + " takes no class argument");
            }
            break;
        case ModuleFamily::count_area:
            if (!is_landcover_class(call.class_arg)) {
                throw ValidationError("count_area requires a landcover class, got \"" +
                                      call.class_arg + "\"");
            }
            break;
        case ModuleFamily::get_distance_to_nearest_target:
            if (!is_target_class(call.class_arg)) {
                throw ValidationError(
                    "get_distance_to_nearest_target requires 'airport' or 'port', got \"" +
                    call.class_arg + "\"");
            }
            break;
        case ModuleFamily::get_aggregate_neighbor_info:
            // the wrapper never appears as a family of its own
            throw ValidationError("neighbor aggregation must wrap an inner call");
    }
}

}  // namespace geoinfer
