#include <stdexcept>

#include "qdens/pipeline.hpp"

namespace qdens {

namespace {

nlohmann::json h2_reservoir(double vnn, double delta_loc) {
    return {{"omega_glob", 5.0}, {"delta_glob", 0.0},    {"delta_loc", delta_loc},
            {"v_homo", 0.5},     {"vnn", vnn},           {"c6", 865723.02}};
}

nlohmann::json base_h2() {
    nlohmann::json j;
    j["problem"] = {{"kind", "h2"}};
    j["reservoir"] = h2_reservoir(4.0, -3.5);
    j["seed"] = 20250810;
    return j;
}

nlohmann::json base_triple_well() {
    nlohmann::json j;
    j["problem"] = {{"kind", "triple_well"}};
    j["reservoir"] = {{"omega_glob", 5.0}, {"delta_glob", 5.0}, {"delta_loc", -1.0},
                      {"v_homo", 0.5},     {"vnn", 0.5},        {"c6", 865723.02}};
    j["seed"] = 20250810;
    return j;
}

} // namespace

std::vector<std::string> preset_names() {
    return {"fig2a", "fig2b", "fig3a", "fig3b", "fig4a",
            "fig4b", "fig4c", "fig5",  "fig6"};
}

nlohmann::json preset_config(const std::string& name) {
    if (name == "fig2a" || name == "fig3a") return base_h2();
    if (name == "fig2b") {
        nlohmann::json j = base_h2();
        j["vnn_list"] = {1.0, 2.0, 4.0, 8.0};
        return j;
    }
    if (name == "fig3b") {
        nlohmann::json j = base_h2();
        j["reservoir"] = h2_reservoir(4.0, -2.0);
        return j;
    }
    if (name == "fig4a" || name == "fig4b" || name == "fig4c") return base_triple_well();
    if (name == "fig5") {
        nlohmann::json j = base_triple_well();
        j["reservoir"] = {{"omega_glob", 5.0}, {"delta_glob", 5.0}, {"delta_loc", -1.1},
                          {"v_homo", 0.5},     {"side_um", 10.0},   {"c6", 865723.02}};
        j["times"] = {{"explicit", {0.6}}};
        j["train_sizes"] = {10, 20, 40};
        return j;
    }
    if (name == "fig6") {
        nlohmann::json j = base_triple_well();
        j["reservoir"] = {{"omega_glob", 7.5}, {"delta_glob", 5.0}, {"delta_loc", -1.1},
                          {"v_homo", 0.5},     {"vnn", 1.0},        {"c6", 865723.02}};
        j["interval_sets"] = {{{"heights", {1.0, 1.4}}, {"widths", {0.3, 0.4}}},
                              {{"heights", {0.8, 1.6}}, {"widths", {0.2, 0.5}}},
                              {{"heights", {0.6, 1.8}}, {"widths", {0.1, 0.6}}}};
        return j;
    }
    throw std::invalid_argument("unknown preset: " + name);
}

} // namespace qdens
