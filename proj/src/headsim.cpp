#include "maskeval/headsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "maskeval/rng.hpp"

namespace maskeval {

using ordered_json = nlohmann::ordered_json;

std::vector<double> multiclass_scores(const std::vector<double>& raw_scores) {
    if (raw_scores.empty()) throw eval_error("multiclass_scores: empty score vector");
    const double peak = *std::max_element(raw_scores.begin(), raw_scores.end());
    std::vector<double> out(raw_scores.size());
    double sum = 0;
    for (size_t i = 0; i < raw_scores.size(); ++i) {
        out[i] = std::exp(raw_scores[i] - peak);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

std::vector<PredDetection> finalize_detections(const std::vector<RawProposal>& proposals,
                                               int num_classes) {
    std::vector<PredDetection> dets;
    for (const auto& p : proposals) {
        if (static_cast<int>(p.raw_scores.size()) != num_classes + 1) {
            throw eval_error("finalize_detections: raw score vector must have K+1 entries");
        }
        if (!p.mask_grids.empty() && static_cast<int>(p.mask_grids.size()) != num_classes) {
            throw eval_error("finalize_detections: expected one mask grid per real class");
        }
        const std::vector<double> probs = multiclass_scores(p.raw_scores);

        int best_real = 1;
        for (int c = 2; c <= num_classes; ++c) {
            if (probs[c] > probs[best_real]) best_real = c;
        }
        bool background_wins = true;
        for (int c = 1; c <= num_classes; ++c) {
            if (probs[c] >= probs[0]) {
                background_wins = false;
                break;
            }
        }
        if (background_wins) continue;

        PredDetection det;
        det.class_index = best_real;
        det.score = probs[best_real];
        det.box = box_from_center(p.cx, p.cy, p.w, p.h);
        if (!p.mask_grids.empty()) det.grid = p.mask_grids[static_cast<size_t>(best_real - 1)];
        dets.push_back(std::move(det));
    }
    return dets;
}

const char* to_string(Corruption c) {
    switch (c) {
        case Corruption::none: return "none";
        case Corruption::partial: return "partial";
        case Corruption::shifted: return "shifted";
        case Corruption::oversized: return "oversized";
        case Corruption::noisy: return "noisy";
    }
    return "?";
}

Corruption corruption_from_string(const std::string& name) {
    if (name == "none") return Corruption::none;
    if (name == "partial") return Corruption::partial;
    if (name == "shifted") return Corruption::shifted;
    if (name == "oversized") return Corruption::oversized;
    if (name == "noisy") return Corruption::noisy;
    throw parse_error("unknown corruption mode '" + name + "'");
}

ScenarioSpec parse_scenario(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw parse_error(std::string("scenario: invalid JSON (") + e.what() + ")");
    }
    ScenarioSpec spec;
    if (j.contains("image_dims")) {
        spec.dims.width = j["image_dims"].value("width", 0);
        spec.dims.height = j["image_dims"].value("height", 0);
        if (!spec.dims.valid()) throw parse_error("scenario: invalid image_dims");
    }
    if (j.contains("classes")) {
        std::vector<std::string> names;
        for (const auto& n : j["classes"]) names.push_back(n.get<std::string>());
        spec.classes = ClassTable(std::move(names));
    }
    spec.seed = j.value("seed", 0ULL);
    spec.grid_side = j.value("grid_side", 33);
    if (spec.grid_side < 1) throw parse_error("scenario: grid_side must be >= 1");

    if (!j.contains("images") || !j["images"].is_array()) {
        throw parse_error("scenario: expected an 'images' array");
    }
    int img_index = 0;
    for (const auto& ij : j["images"]) {
        ScenarioImage img;
        img.id = ij.value("id", "img_" + std::to_string(img_index));
        for (const auto& inst : ij.value("instances", ordered_json::array())) {
            ScenarioInstance s;
            const std::string cname = inst.value("class", "");
            const auto ci = spec.classes.index_of(cname);
            if (!ci || *ci == 0) throw parse_error("scenario: unknown class '" + cname + "'");
            s.class_index = *ci;
            if (!inst.contains("polygon") || !inst["polygon"].is_array() || inst["polygon"].size() < 3) {
                throw parse_error("scenario: instance needs a polygon with >= 3 vertices");
            }
            for (const auto& v : inst["polygon"]) {
                s.polygon.push_back(Point{v[0].get<double>(), v[1].get<double>()});
            }
            s.score = inst.value("score", 0.9);
            if (s.score < 0.0 || s.score > 1.0) throw parse_error("scenario: score outside [0, 1]");
            s.corruption = corruption_from_string(inst.value("corruption", "none"));
            if (inst.contains("jitter")) {
                const auto& jt = inst["jitter"];
                s.jitter_dx = jt.value("dx", 0.0);
                s.jitter_dy = jt.value("dy", 0.0);
                s.jitter_dw = jt.value("dw", 0.0);
                s.jitter_dh = jt.value("dh", 0.0);
            }
            s.jitter_frac = inst.value("jitter_frac", 0.0);
            s.partial_frac = inst.value("partial_frac", 0.6);
            s.shift_frac = inst.value("shift_frac", 0.35);
            s.noise_amp = inst.value("noise_amp", 0.2);
            img.instances.push_back(std::move(s));
        }
        spec.images.push_back(std::move(img));
        ++img_index;
    }
    return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

namespace {

Polygon rect_polygon(double x0, double y0, double x1, double y1) {
    return Polygon{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

// Plus-shaped polygon spanning the full box, arm thickness = frac of each
// extent. Its area is (2*frac - frac^2) of the box, well under half for
// frac = 0.2, which is what the oversized fixture needs.
Polygon cross_polygon(double x0, double y0, double x1, double y1, double frac) {
    const double cx = (x0 + x1) / 2, cy = (y0 + y1) / 2;
    const double a = frac * (x1 - x0) / 2, b = frac * (y1 - y0) / 2;
    return Polygon{{cx - a, y0}, {cx + a, y0}, {cx + a, cy - b}, {x1, cy - b},
                   {x1, cy + b}, {cx + a, cy + b}, {cx + a, y1}, {cx - a, y1},
                   {cx - a, cy + b}, {x0, cy + b}, {x0, cy - b}, {cx - a, cy - b}};
}

// Fraction of set GT pixels whose centers land in each grid cell of the box.
MaskGrid sample_grid(const BinaryMask& gt_mask, const BoundingBox& box, int side) {
    MaskGrid grid;
    grid.side = side;
    grid.values.assign(static_cast<size_t>(side) * side, 0.0);
    if (box.width() <= 0 || box.height() <= 0) return grid;
    const ImageDims dims = gt_mask.dims();
    std::vector<long> set(static_cast<size_t>(side) * side, 0);
    std::vector<long> total(static_cast<size_t>(side) * side, 0);
    const int r0 = std::max(0, static_cast<int>(std::floor(box.y_min)));
    const int r1 = std::min(dims.height - 1, static_cast<int>(std::ceil(box.y_max)));
    const int c0 = std::max(0, static_cast<int>(std::floor(box.x_min)));
    const int c1 = std::min(dims.width - 1, static_cast<int>(std::ceil(box.x_max)));
    for (int r = r0; r <= r1; ++r) {
        const double py = r + 0.5;
        if (py < box.y_min || py >= box.y_max) continue;
        const int gr = std::min(side - 1, static_cast<int>((py - box.y_min) / box.height() * side));
        for (int c = c0; c <= c1; ++c) {
            const double px = c + 0.5;
            if (px < box.x_min || px >= box.x_max) continue;
            const int gc = std::min(side - 1, static_cast<int>((px - box.x_min) / box.width() * side));
            total[static_cast<size_t>(gr) * side + gc] += 1;
            set[static_cast<size_t>(gr) * side + gc] += gt_mask.at(r, c);
        }
    }
    for (size_t i = 0; i < grid.values.size(); ++i) {
        if (total[i] > 0) grid.values[i] = static_cast<double>(set[i]) / static_cast<double>(total[i]);
    }
    return grid;
}

void corrupt_partial(MaskGrid& grid, double frac) {
    const int side = grid.side;
    std::vector<double> col_mass(static_cast<size_t>(side), 0.0);
    double total = 0;
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            col_mass[c] += grid.at(r, c);
            total += grid.at(r, c);
        }
    }
    if (total <= 0) return;
    // Erase a centered contiguous column band until `frac` of the mass is gone.
    const int mid = side / 2;
    int lo = mid, hi = mid;
    double erased = col_mass[mid];
    while (erased < frac * total && (lo > 0 || hi < side - 1)) {
        const double left = lo > 0 ? col_mass[lo - 1] : -1;
        const double right = hi < side - 1 ? col_mass[hi + 1] : -1;
        bool grow_right;
        if (right > left) {
            grow_right = true;
        } else if (left > right) {
            grow_right = false;
        } else {
            grow_right = (hi - mid) <= (mid - lo); // tie: keep the band centered
        }
        if (grow_right) {
            ++hi;
            erased += col_mass[hi];
        } else {
            --lo;
            erased += col_mass[lo];
        }
    }
    for (int r = 0; r < side; ++r) {
        for (int c = lo; c <= hi; ++c) grid.values[static_cast<size_t>(r) * side + c] = 0.0;
    }
}

void corrupt_shifted(MaskGrid& grid, double frac) {
    const int side = grid.side;
    const int shift = static_cast<int>(std::lround(frac * side));
    std::vector<double> shifted(grid.values.size(), 0.0);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const int src = c - shift;
            if (src >= 0) shifted[static_cast<size_t>(r) * side + c] = grid.at(r, src);
        }
    }
    grid.values = std::move(shifted);
}

void corrupt_noisy(MaskGrid& grid, double amp, SplitMix64& rng) {
    for (auto& v : grid.values) {
        v = std::min(1.0, std::max(0.0, v + rng.uniform(-amp, amp)));
    }
}

} // namespace

ScenarioSpec planted_failure_scenario(std::uint64_t seed) {
    ScenarioSpec spec;
    spec.seed = seed;

    ScenarioImage img;
    img.id = "img_000";

    ScenarioInstance clean1;
    clean1.class_index = *spec.classes.index_of("Manhole");
    clean1.polygon = rect_polygon(100, 100, 200, 200);
    clean1.score = 0.95;
    img.instances.push_back(clean1);

    // Square-ish instance: the centered-band erase keeps the centroid put.
    ScenarioInstance partial;
    partial.class_index = *spec.classes.index_of("Crack1");
    partial.polygon = rect_polygon(300, 100, 420, 220);
    partial.score = 0.9;
    partial.corruption = Corruption::partial;
    img.instances.push_back(partial);

    // Wide 2:1 instance with the box displaced a fifth of its width: the grid
    // shift lands the mask well off the GT while the box IoU stays at 2/3.
    ScenarioInstance shifted;
    shifted.class_index = *spec.classes.index_of("Joint");
    shifted.polygon = rect_polygon(500, 100, 740, 220);
    shifted.score = 0.85;
    shifted.corruption = Corruption::shifted;
    shifted.jitter_dx = 48;
    img.instances.push_back(shifted);

    // Thin cross (36% of its box): dilating to the full box overshoots 1.5x.
    ScenarioInstance oversized;
    oversized.class_index = *spec.classes.index_of("Filling");
    oversized.polygon = cross_polygon(100, 300, 340, 420, 0.2);
    oversized.score = 0.9;
    oversized.corruption = Corruption::oversized;
    img.instances.push_back(oversized);

    ScenarioInstance clean2;
    clean2.class_index = *spec.classes.index_of("Marking");
    clean2.polygon = rect_polygon(500, 300, 800, 400);
    clean2.score = 0.9;
    img.instances.push_back(clean2);

    spec.images.push_back(std::move(img));
    return spec;
}

ScenarioSpec perfect_scenario(std::uint64_t seed) {
    ScenarioSpec spec;
    spec.seed = seed;
    const struct {
        const char* cls;
        double x0, y0, x1, y1;
    } rects[] = {
        {"Crack1", 100, 100, 300, 180},
        {"Manhole", 400, 200, 520, 320},
        {"Marking", 50, 50, 650, 150},
        {"Filling", 200, 300, 360, 500},
    };
    int i = 0;
    for (const auto& r : rects) {
        ScenarioImage img;
        img.id = "img_" + std::string(i < 10 ? "00" : "0") + std::to_string(i);
        ScenarioInstance inst;
        inst.class_index = *spec.classes.index_of(r.cls);
        inst.polygon = rect_polygon(r.x0, r.y0, r.x1, r.y1);
        inst.score = 0.9;
        img.instances.push_back(std::move(inst));
        spec.images.push_back(std::move(img));
        ++i;
    }
    return spec;
}

std::pair<GroundTruthDoc, PredictionDoc> synth_scenario(const ScenarioSpec& spec) {
    if (!spec.dims.valid()) throw eval_error("synth_scenario: invalid dims");
    SplitMix64 rng(spec.seed);

    GroundTruthDoc gt;
    gt.dims = spec.dims;
    gt.classes = spec.classes;
    PredictionDoc pred;

    for (const auto& img : spec.images) {
        GtImage gt_img;
        gt_img.id = img.id;
        PredImage pred_img;
        pred_img.id = img.id;

        for (const auto& inst : img.instances) {
            for (const auto& p : inst.polygon) {
                if (p[0] < 0 || p[0] > spec.dims.width || p[1] < 0 || p[1] > spec.dims.height) {
                    throw eval_error("synth_scenario: polygon outside the frame in image '" + img.id +
                                     "'");
                }
            }
            GtInstance g;
            g.class_index = inst.class_index;
            g.polygon = inst.polygon;
            g.box = tight_bounds(inst.polygon);
            gt_img.instances.push_back(g);

            // Jitter the box in center form.
            auto center = box_to_center(g.box);
            double dx = inst.jitter_dx, dy = inst.jitter_dy, dw = inst.jitter_dw, dh = inst.jitter_dh;
            if (inst.jitter_frac > 0) {
                dx += rng.uniform(-inst.jitter_frac, inst.jitter_frac) * center[2];
                dy += rng.uniform(-inst.jitter_frac, inst.jitter_frac) * center[3];
                dw += rng.uniform(-inst.jitter_frac, inst.jitter_frac) * center[2];
                dh += rng.uniform(-inst.jitter_frac, inst.jitter_frac) * center[3];
            }
            const BoundingBox det_box =
                box_from_center(center[0] + dx, center[1] + dy, std::max(0.0, center[2] + dw),
                                std::max(0.0, center[3] + dh));

            const BinaryMask true_mask = polygon_rasterize(inst.polygon, spec.dims);
            MaskGrid grid = sample_grid(true_mask, clip_box(det_box, spec.dims), spec.grid_side);
            switch (inst.corruption) {
                case Corruption::none: break;
                case Corruption::partial: corrupt_partial(grid, inst.partial_frac); break;
                case Corruption::shifted: corrupt_shifted(grid, inst.shift_frac); break;
                case Corruption::oversized: std::fill(grid.values.begin(), grid.values.end(), 1.0); break;
                case Corruption::noisy: corrupt_noisy(grid, inst.noise_amp, rng); break;
            }

            PredDetection det;
            det.class_index = inst.class_index;
            det.score = inst.score;
            det.box = det_box;
            det.grid = std::move(grid);
            pred_img.detections.push_back(std::move(det));
        }
        gt.images.push_back(std::move(gt_img));
        pred.images.push_back(std::move(pred_img));
    }
    return {std::move(gt), std::move(pred)};
}

} // namespace maskeval
