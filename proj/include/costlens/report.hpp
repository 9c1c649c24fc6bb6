#pragma once

#include "costlens/catalog.hpp"
#include "costlens/geography.hpp"
#include "costlens/json.hpp"
#include "costlens/types.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace costlens {

// Region id 0 is the full frame; ids >= 1 select RoIs.
std::string region_key(int region_id);

// Comma-separated class names or indices; "all" selects every class.
std::vector<int> parse_class_list(std::string_view text, const ClassCatalog& catalog);

// {class name: {region key: {precision, recall, tp, fp, fn, fp_segments,
// fn_segments}}}. Undefined ratios are null.
Json metrics_report(const Mask& pred, const LabelField& gt, const ClassCatalog& catalog,
                    std::span<const int> classes, std::span<const int> region_ids,
                    const RoiMap* roi = nullptr, int region_count = 0);

// [{index, name, color: [r, g, b]}] for every class of the catalog.
Json palette_legend(const ClassCatalog& catalog);

}  // namespace costlens
