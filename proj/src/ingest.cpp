#include "maskeval/ingest.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace maskeval {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kBoxTolerance = 0.5;   // provided GT boxes may deviate this much per edge
constexpr double kClampTolerance = 0.5; // vertices may stick out this far and get clamped

[[noreturn]] void fail(const std::string& context, const std::string& what) {
    throw parse_error(context.empty() ? what : context + ": " + what);
}

ordered_json parse_json(const std::string& text, const std::string& context) {
    try {
        return ordered_json::parse(text);
    } catch (const std::exception& e) {
        fail(context, std::string("invalid JSON (") + e.what() + ")");
    }
}

double get_number(const ordered_json& j, const char* key, const std::string& context) {
    if (!j.contains(key) || !j[key].is_number()) fail(context, std::string("missing number '") + key + "'");
    return j[key].get<double>();
}

ImageDims parse_dims(const ordered_json& j, const std::string& context) {
    ImageDims d;
    d.width = static_cast<int>(get_number(j, "width", context));
    d.height = static_cast<int>(get_number(j, "height", context));
    if (!d.valid()) fail(context, "dims must be positive");
    return d;
}

Polygon parse_polygon(const ordered_json& j, const std::string& context) {
    if (!j.is_array() || j.size() < 3) fail(context, "polygon needs at least 3 vertices");
    Polygon poly;
    poly.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            fail(context, "polygon vertex must be [x, y]");
        }
        poly.push_back(Point{v[0].get<double>(), v[1].get<double>()});
    }
    return poly;
}

// Clamp vertices into the frame; reject excursions beyond the tolerance.
Polygon clamp_polygon(Polygon poly, const ImageDims& dims, const std::string& context) {
    for (auto& p : poly) {
        const double w = dims.width, h = dims.height;
        if (p[0] < -kClampTolerance || p[0] > w + kClampTolerance || p[1] < -kClampTolerance ||
            p[1] > h + kClampTolerance) {
            fail(context, "polygon vertex (" + std::to_string(p[0]) + ", " + std::to_string(p[1]) +
                              ") lies outside the frame");
        }
        p[0] = std::min(std::max(p[0], 0.0), w);
        p[1] = std::min(std::max(p[1], 0.0), h);
    }
    return poly;
}

RleMask parse_rle(const ordered_json& j, const std::string& context) {
    if (!j.is_object() || !j.contains("dims") || !j.contains("counts") || !j["counts"].is_array()) {
        fail(context, "rle must carry 'dims' and 'counts'");
    }
    const ImageDims dims = parse_dims(j["dims"], context + " rle dims");
    std::vector<std::uint32_t> counts;
    counts.reserve(j["counts"].size());
    for (const auto& c : j["counts"]) {
        if (!c.is_number_integer() || c.get<long long>() < 0) fail(context, "rle counts must be non-negative integers");
        counts.push_back(static_cast<std::uint32_t>(c.get<long long>()));
    }
    try {
        return make_rle(dims, std::move(counts));
    } catch (const mask_error& e) {
        fail(context, e.what());
    }
}

BoundingBox parse_box(const ordered_json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 4) fail(context, "box must be [x0, y0, x1, y1]");
    for (const auto& v : j) {
        if (!v.is_number()) fail(context, "box entries must be numbers");
    }
    BoundingBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!b.valid()) fail(context, "box has x_min > x_max or y_min > y_max");
    return b;
}

ordered_json dims_json(const ImageDims& d) {
    return ordered_json{{"width", d.width}, {"height", d.height}};
}

ordered_json box_json(const BoundingBox& b) {
    return ordered_json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

ordered_json rle_json(const RleMask& r) {
    ordered_json j;
    j["dims"] = dims_json(r.dims);
    j["counts"] = r.counts;
    return j;
}

} // namespace

ClassTable::ClassTable() : names_{"background"} {}

ClassTable::ClassTable(std::vector<std::string> real_classes) {
    names_.reserve(real_classes.size() + 1);
    names_.emplace_back("background");
    for (auto& n : real_classes) {
        if (n == "background") throw parse_error("ClassTable: 'background' is reserved");
        names_.push_back(std::move(n));
    }
    std::set<std::string> seen(names_.begin(), names_.end());
    if (seen.size() != names_.size()) throw parse_error("ClassTable: duplicate class name");
    if (num_classes() < 1) throw parse_error("ClassTable: need at least one real class");
}

const ClassTable& ClassTable::road_defaults() {
    static const ClassTable table({"Crack1", "Crack2", "Joint", "Patching", "Filling", "Pothole",
                                   "Manhole", "Stain", "Shadow", "Marking", "Scratch", "Patching2"});
    return table;
}

const std::string& ClassTable::name(int index) const {
    if (index < 0 || index >= size_with_background()) throw eval_error("ClassTable: index out of range");
    return names_[index];
}

std::optional<int> ClassTable::index_of(std::string_view name) const {
    for (size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return static_cast<int>(i);
    }
    return std::nullopt;
}

std::vector<std::string> ClassTable::real_names() const {
    return {names_.begin() + 1, names_.end()};
}

GroundTruthDoc parse_ground_truth(const std::string& json_text) {
    const ordered_json j = parse_json(json_text, "ground truth");
    if (!j.is_object() || !j.contains("image_dims") || !j.contains("classes") || !j.contains("images")) {
        fail("ground truth", "expected object with image_dims, classes, images");
    }
    GroundTruthDoc doc;
    doc.dims = parse_dims(j["image_dims"], "ground truth image_dims");
    if (!j["classes"].is_array()) fail("ground truth", "'classes' must be an array of names");
    std::vector<std::string> names;
    for (const auto& n : j["classes"]) {
        if (!n.is_string()) fail("ground truth", "class names must be strings");
        names.push_back(n.get<std::string>());
    }
    doc.classes = ClassTable(std::move(names));

    std::set<std::string> ids;
    for (const auto& img : j["images"]) {
        if (!img.is_object() || !img.contains("id")) fail("ground truth", "image entry needs an 'id'");
        GtImage gi;
        gi.id = img["id"].is_string() ? img["id"].get<std::string>() : img["id"].dump();
        if (!ids.insert(gi.id).second) fail("ground truth", "duplicate image id '" + gi.id + "'");
        const std::string img_ctx = "image '" + gi.id + "'";
        if (img.contains("instances")) {
            int index = 0;
            for (const auto& inst : img["instances"]) {
                const std::string ctx = img_ctx + " instance " + std::to_string(index);
                GtInstance g;
                if (!inst.is_object() || !inst.contains("class") || !inst["class"].is_string()) {
                    fail(ctx, "missing class name");
                }
                const std::string cname = inst["class"].get<std::string>();
                const auto ci = doc.classes.index_of(cname);
                if (!ci || *ci == 0) fail(ctx, "unknown class '" + cname + "'");
                g.class_index = *ci;

                if (inst.contains("polygon")) {
                    g.polygon = clamp_polygon(parse_polygon(inst["polygon"], ctx), doc.dims, ctx);
                }
                if (inst.contains("rle")) {
                    g.rle = parse_rle(inst["rle"], ctx);
                    if (!(g.rle->dims == doc.dims)) fail(ctx, "rle dims differ from the frame dims");
                }
                if (!g.polygon && !g.rle) fail(ctx, "instance needs a polygon or an rle mask");

                BoundingBox tight;
                if (g.rle) {
                    const BinaryMask m = rle_decode(*g.rle);
                    if (mask_area(m) == 0) fail(ctx, "rle mask is empty");
                    tight = mask_tight_bounds(m);
                } else {
                    tight = tight_bounds(*g.polygon);
                }
                if (inst.contains("box")) {
                    const BoundingBox given = parse_box(inst["box"], ctx);
                    if (std::abs(given.x_min - tight.x_min) > kBoxTolerance ||
                        std::abs(given.y_min - tight.y_min) > kBoxTolerance ||
                        std::abs(given.x_max - tight.x_max) > kBoxTolerance ||
                        std::abs(given.y_max - tight.y_max) > kBoxTolerance) {
                        fail(ctx, "box deviates more than 0.5 px from the geometry's tight bounds");
                    }
                    g.box = given;
                } else {
                    g.box = tight;
                }
                gi.instances.push_back(std::move(g));
                ++index;
            }
        }
        doc.images.push_back(std::move(gi));
    }
    return doc;
}

std::string serialize_ground_truth(const GroundTruthDoc& doc) {
    ordered_json j;
    j["image_dims"] = dims_json(doc.dims);
    j["classes"] = doc.classes.real_names();
    j["images"] = ordered_json::array();
    for (const auto& img : doc.images) {
        ordered_json ji;
        ji["id"] = img.id;
        ji["instances"] = ordered_json::array();
        for (const auto& inst : img.instances) {
            ordered_json jj;
            jj["class"] = doc.classes.name(inst.class_index);
            if (inst.polygon) {
                ordered_json pts = ordered_json::array();
                for (const auto& p : *inst.polygon) pts.push_back(ordered_json::array({p[0], p[1]}));
                jj["polygon"] = std::move(pts);
            }
            if (inst.rle) jj["rle"] = rle_json(*inst.rle);
            jj["box"] = box_json(inst.box);
            ji["instances"].push_back(std::move(jj));
        }
        j["images"].push_back(std::move(ji));
    }
    return j.dump(2) + "\n";
}

PredictionDoc parse_predictions(const std::string& json_text) {
    const ordered_json j = parse_json(json_text, "predictions");
    if (!j.is_object() || !j.contains("images") || !j["images"].is_array()) {
        fail("predictions", "expected object with an 'images' array");
    }
    PredictionDoc doc;
    std::set<std::string> ids;
    for (const auto& img : j["images"]) {
        if (!img.is_object() || !img.contains("id")) fail("predictions", "image entry needs an 'id'");
        PredImage pi;
        pi.id = img["id"].is_string() ? img["id"].get<std::string>() : img["id"].dump();
        if (!ids.insert(pi.id).second) fail("predictions", "duplicate image id '" + pi.id + "'");
        const std::string img_ctx = "image '" + pi.id + "'";

        long declared = -1;
        if (img.contains("num_detections")) {
            if (!img["num_detections"].is_number_integer()) fail(img_ctx, "num_detections must be an integer");
            declared = img["num_detections"].get<long>();
        }
        int index = 0;
        if (img.contains("detections")) {
            for (const auto& det : img["detections"]) {
                const std::string ctx = img_ctx + " detection " + std::to_string(index);
                PredDetection d;
                if (!det.is_object() || !det.contains("class_index") ||
                    !det["class_index"].is_number_integer()) {
                    fail(ctx, "missing integer class_index");
                }
                d.class_index = det["class_index"].get<int>();
                if (d.class_index == 0) fail(ctx, "class_index 0 (background) is not a detection");
                if (d.class_index < 0) fail(ctx, "class_index must be positive");
                d.score = get_number(det, "score", ctx);
                if (d.score < 0.0 || d.score > 1.0) {
                    fail(ctx, "score " + std::to_string(d.score) + " outside [0, 1]");
                }
                if (!det.contains("box")) fail(ctx, "missing box");
                d.box = parse_box(det["box"], ctx);
                if (det.contains("mask_grid")) {
                    const auto& gj = det["mask_grid"];
                    if (!gj.is_object() || !gj.contains("side") || !gj.contains("values") ||
                        !gj["values"].is_array()) {
                        fail(ctx, "mask_grid must carry 'side' and row-major 'values'");
                    }
                    MaskGrid grid;
                    grid.side = gj["side"].get<int>();
                    if (grid.side < 1) fail(ctx, "mask_grid side must be >= 1");
                    grid.values.reserve(gj["values"].size());
                    for (const auto& v : gj["values"]) {
                        if (!v.is_number()) fail(ctx, "mask_grid values must be numbers");
                        const double x = v.get<double>();
                        if (x < 0.0 || x > 1.0) fail(ctx, "mask_grid values must lie in [0, 1]");
                        grid.values.push_back(x);
                    }
                    if (grid.values.size() != static_cast<size_t>(grid.side) * grid.side) {
                        fail(ctx, "mask_grid values length must equal side*side");
                    }
                    d.grid = std::move(grid);
                }
                if (det.contains("rle")) d.rle = parse_rle(det["rle"], ctx);
                pi.detections.push_back(std::move(d));
                ++index;
            }
        }
        if (declared >= 0 && declared != static_cast<long>(pi.detections.size())) {
            fail(img_ctx, "num_detections=" + std::to_string(declared) + " but " +
                              std::to_string(pi.detections.size()) + " detections listed");
        }
        doc.images.push_back(std::move(pi));
    }
    return doc;
}

std::string serialize_predictions(const PredictionDoc& doc) {
    ordered_json j;
    j["images"] = ordered_json::array();
    for (const auto& img : doc.images) {
        ordered_json ji;
        ji["id"] = img.id;
        ji["num_detections"] = img.detections.size();
        ji["detections"] = ordered_json::array();
        for (const auto& det : img.detections) {
            ordered_json jd;
            jd["class_index"] = det.class_index;
            jd["score"] = det.score;
            jd["box"] = box_json(det.box);
            if (det.grid) {
                jd["mask_grid"] = ordered_json{{"side", det.grid->side}, {"values", det.grid->values}};
            }
            if (det.rle) jd["rle"] = rle_json(*det.rle);
            ji["detections"].push_back(std::move(jd));
        }
        j["images"].push_back(std::move(ji));
    }
    return j.dump(2) + "\n";
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

GroundTruthDoc load_ground_truth(const std::filesystem::path& path) {
    try {
        return parse_ground_truth(read_file(path));
    } catch (const parse_error& e) {
        throw parse_error(path.string() + ": " + e.what());
    }
}

PredictionDoc load_predictions(const std::filesystem::path& path) {
    try {
        return parse_predictions(read_file(path));
    } catch (const parse_error& e) {
        throw parse_error(path.string() + ": " + e.what());
    }
}

namespace {

// One VoTT asset record: {"asset": {...}, "regions": [...]}.
GtImage convert_vott_asset(const ordered_json& rec, const ImageDims target, const ClassTable& classes,
                           const std::string& fallback_id) {
    if (!rec.is_object() || !rec.contains("asset") || !rec["asset"].is_object()) {
        fail("vott asset '" + fallback_id + "'", "missing 'asset' object");
    }
    const auto& asset = rec["asset"];
    GtImage out;
    if (asset.contains("name") && asset["name"].is_string()) {
        out.id = asset["name"].get<std::string>();
    } else if (asset.contains("id") && asset["id"].is_string()) {
        out.id = asset["id"].get<std::string>();
    } else {
        out.id = fallback_id;
    }
    const std::string ctx = "vott asset '" + out.id + "'";
    if (!asset.contains("size") || !asset["size"].is_object()) fail(ctx, "missing source dims (asset.size)");
    const ImageDims source = parse_dims(asset["size"], ctx + " size");

    if (!rec.contains("regions") || !rec["regions"].is_array()) return out;
    int index = 0;
    for (const auto& region : rec["regions"]) {
        const std::string rctx = ctx + " region " + std::to_string(index);
        if (!region.is_object() || !region.contains("points") || !region["points"].is_array() ||
            region["points"].size() < 3) {
            fail(rctx, "region needs at least 3 points");
        }
        if (!region.contains("tags") || !region["tags"].is_array() || region["tags"].empty() ||
            !region["tags"][0].is_string()) {
            fail(rctx, "region needs a tag");
        }
        const std::string tag = region["tags"][0].get<std::string>();
        const auto ci = classes.index_of(tag);
        if (!ci || *ci == 0) fail(rctx, "unmappable tag '" + tag + "'");

        Polygon poly;
        poly.reserve(region["points"].size());
        for (const auto& pt : region["points"]) {
            if (!pt.is_object() || !pt.contains("x") || !pt.contains("y")) {
                fail(rctx, "points must be {x, y} objects");
            }
            poly.push_back(Point{get_number(pt, "x", rctx), get_number(pt, "y", rctx)});
        }
        poly = clamp_polygon(std::move(poly), source, rctx);

        GtInstance g;
        g.class_index = *ci;
        g.polygon = rescale(poly, source, target);
        g.box = tight_bounds(*g.polygon);
        out.instances.push_back(std::move(g));
        ++index;
    }
    return out;
}

} // namespace

GroundTruthDoc convert_vott(const std::string& vott_json, ImageDims target, const ClassTable& classes) {
    if (!target.valid()) throw parse_error("convert_vott: invalid target dims");
    const ordered_json j = parse_json(vott_json, "vott document");
    GroundTruthDoc doc;
    doc.dims = target;
    doc.classes = classes;

    if (j.is_object() && j.contains("asset")) {
        doc.images.push_back(convert_vott_asset(j, target, classes, "asset_0"));
    } else if (j.is_object() && j.contains("assets")) {
        const auto& assets = j["assets"];
        if (assets.is_array()) {
            int i = 0;
            for (const auto& rec : assets) {
                doc.images.push_back(convert_vott_asset(rec, target, classes, "asset_" + std::to_string(i++)));
            }
        } else if (assets.is_object()) {
            for (auto it = assets.begin(); it != assets.end(); ++it) {
                doc.images.push_back(convert_vott_asset(it.value(), target, classes, it.key()));
            }
        } else {
            fail("vott document", "'assets' must be an object or array");
        }
    } else {
        fail("vott document", "expected 'asset' or 'assets'");
    }
    return doc;
}

std::array<long, 3> DatasetSummary::split_totals() const {
    std::array<long, 3> t{0, 0, 0};
    for (const auto& row : counts) {
        for (int s = 0; s < 3; ++s) t[s] += row[s];
    }
    return t;
}

long DatasetSummary::class_total(int row) const {
    return counts[row][0] + counts[row][1] + counts[row][2];
}

long DatasetSummary::grand_total() const {
    const auto t = split_totals();
    return t[0] + t[1] + t[2];
}

DatasetSummary validate_dataset(const GroundTruthDoc* training, const GroundTruthDoc* validation,
                                const GroundTruthDoc* testing) {
    const GroundTruthDoc* docs[3] = {training, validation, testing};
    const ClassTable* table = nullptr;
    for (const auto* d : docs) {
        if (!d) continue;
        if (!table) {
            table = &d->classes;
        } else if (!(*table == d->classes)) {
            throw eval_error("validate_dataset: splits use different class tables");
        }
    }
    DatasetSummary summary;
    summary.classes = table ? *table : ClassTable::road_defaults();
    summary.counts.assign(static_cast<size_t>(summary.classes.num_classes()), {0, 0, 0});
    for (int s = 0; s < 3; ++s) {
        if (!docs[s]) continue;
        for (const auto& img : docs[s]->images) {
            for (const auto& inst : img.instances) {
                summary.counts[static_cast<size_t>(inst.class_index - 1)][s] += 1;
            }
        }
    }
    return summary;
}

std::vector<std::string> diff_summary(const DatasetSummary& summary, const std::string& expected_json) {
    const ordered_json j = parse_json(expected_json, "expected summary");
    std::vector<std::string> mismatches;
    auto check = [&](const std::string& label, long expected, long actual) {
        if (expected != actual) {
            mismatches.push_back(label + ": expected " + std::to_string(expected) + ", got " +
                                 std::to_string(actual));
        }
    };
    if (j.contains("counts") && j["counts"].is_object()) {
        for (auto it = j["counts"].begin(); it != j["counts"].end(); ++it) {
            const auto ci = summary.classes.index_of(it.key());
            if (!ci || *ci == 0) {
                mismatches.push_back("unknown class in expected summary: '" + it.key() + "'");
                continue;
            }
            const auto& row = summary.counts[static_cast<size_t>(*ci - 1)];
            const auto& cell = it.value();
            for (int s = 0; s < 3; ++s) {
                const std::string split(DatasetSummary::kSplits[s]);
                if (cell.is_object() && cell.contains(split)) {
                    check(it.key() + "/" + split, cell[split].get<long>(), row[s]);
                } else if (cell.is_array() && cell.size() == 3) {
                    check(it.key() + "/" + split, cell[s].get<long>(), row[s]);
                }
            }
        }
    }
    if (j.contains("totals") && j["totals"].is_object()) {
        const auto t = summary.split_totals();
        for (int s = 0; s < 3; ++s) {
            const std::string split(DatasetSummary::kSplits[s]);
            if (j["totals"].contains(split)) check("totals/" + split, j["totals"][split].get<long>(), t[s]);
        }
        if (j["totals"].contains("overall")) {
            check("totals/overall", j["totals"]["overall"].get<long>(), summary.grand_total());
        }
    }
    return mismatches;
}

} // namespace maskeval
