#include "resq/constraints.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace resq {

namespace {

using nlohmann::json;
using Code = ConstraintError::Code;

constexpr std::array<const char*, 4> kCorrelatorKeys{"E00", "E01", "E10", "E11"};

Timestamp oldest(const std::vector<IntrospectionResult>& children) {
    Timestamp t = Timestamp::max();
    for (const auto& c : children) {
        t = std::min(t, c.evaluated_at);
    }
    return t;
}

// Shortest round-trip decimal form.
std::string format_number(double x) { return json(x).dump(); }

}  // namespace

ConstraintError::ConstraintError(Code code, const std::string& message, Diagnostics diagnostics)
    : std::runtime_error(message), code_(code), diagnostics_(std::move(diagnostics)) {}

std::string Policy::describe() const {
    return (kind == PolicyKind::MinimumAcceptableValue ? "MinimumAcceptableValue(" : "MaximumAcceptableValue(") +
           format_number(threshold) + ")";
}

double IntrospectionResult::operator[](std::string_view key) const {
    const auto it = scores.find(std::string(key));
    if (it == scores.end()) {
        throw std::out_of_range("no score '" + std::string(key) + "' in " + constraint_name + " result");
    }
    return it->second;
}

json introspection_to_json(const IntrospectionResult& r) {
    json children = json::array();
    for (const auto& c : r.children) {
        children.push_back(introspection_to_json(c));
    }
    json doc{{"constraint_name", r.constraint_name},
             {"passed", r.passed},
             {"scores", r.scores},
             {"evaluated_at", format_rfc3339(r.evaluated_at)},
             {"metadata", r.metadata},
             {"children", std::move(children)}};
    if (r.evidence) {
        doc["evidence"] = experiment_result_to_json(*r.evidence);
    }
    return doc;
}

double compute_pair_correlator(const BitstringCounts& counts, std::size_t pair_index) {
    if (pair_index > 3) {
        throw ConstraintError(Code::InvalidArgument, "pair index must be in 0..3");
    }
    if (counts.total() == 0) {
        throw ConstraintError(Code::MalformedCounts, "cannot compute a correlator from zero counts");
    }
    if (counts.width() != 8) {
        throw ConstraintError(Code::MalformedCounts,
                              "packed CHSH counts need 8-bit outcomes, got width " + std::to_string(counts.width()));
    }
    const std::size_t a = 2 * pair_index;
    const std::size_t b = a + 1;
    std::uint64_t equal = 0;
    std::uint64_t unequal = 0;
    for (const auto& [key, n] : counts) {
        (key[a] == key[b] ? equal : unequal) += n;
    }
    return (static_cast<double>(equal) - static_cast<double>(unequal)) / static_cast<double>(counts.total());
}

double chsh_score(double e00, double e01, double e10, double e11) {
    for (const double e : {e00, e01, e10, e11}) {
        if (!(e >= -1.0 && e <= 1.0)) {
            throw ConstraintError(Code::InvalidArgument, "correlator " + format_number(e) + " outside [-1, 1]");
        }
    }
    return e00 + e01 + e10 - e11;
}

PackedChshTest::PackedChshTest(Policy policy, MeasurementSettings settings, std::shared_ptr<const Clock> clock)
    : policy_(policy), settings_(settings), clock_(std::move(clock)) {}

IntrospectionResult PackedChshTest::evaluate(BackendAdapter& adapter, std::uint64_t shots) const {
    if (shots == 0) {
        throw ConstraintError(Code::InvalidArgument, "PackedCHSHTest needs at least one shot");
    }
    auto evidence = adapter.run(packed_chsh_circuit(settings_), shots);

    std::array<double, 4> e{};
    for (std::size_t i = 0; i < 4; ++i) {
        e[i] = compute_pair_correlator(evidence.counts, i);
    }
    const double s = chsh_score(e[0], e[1], e[2], e[3]);
    const auto n = static_cast<double>(evidence.counts.total());

    IntrospectionResult result;
    result.constraint_name = name();
    double variance_sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double var = (1.0 - e[i] * e[i]) / n;
        result.scores[kCorrelatorKeys[i]] = e[i];
        result.scores[std::string("se_") + kCorrelatorKeys[i]] = std::sqrt(var);
        variance_sum += var;
    }
    result.scores["CHSH_score"] = s;
    result.scores["se_S"] = std::sqrt(variance_sum);
    result.passed = policy_.decide(s);
    result.metadata["policy"] = policy_.describe();
    result.evaluated_at = clock_->now();
    result.evidence = std::move(evidence);
    return result;
}

CalibrationConstraint::CalibrationConstraint(CalibrationCriteria criteria, std::shared_ptr<const Clock> clock)
    : criteria_(criteria), clock_(std::move(clock)) {
    if (!criteria_.any()) {
        throw ConstraintError(Code::InvalidArgument, "calibration constraint needs at least one criterion");
    }
}

IntrospectionResult CalibrationConstraint::evaluate(BackendAdapter& adapter, std::uint64_t) const {
    const auto snap = adapter.calibration();

    IntrospectionResult result;
    result.constraint_name = name();
    result.scores["num_qubits"] = static_cast<double>(snap.num_qubits);
    double worst_t1 = std::numeric_limits<double>::infinity();
    double worst_t2 = std::numeric_limits<double>::infinity();
    double worst_readout = 0.0;
    for (const auto& q : snap.qubits) {
        worst_t1 = std::min(worst_t1, q.t1_us);
        worst_t2 = std::min(worst_t2, q.t2_us);
        worst_readout = std::max(worst_readout, q.readout_error);
    }
    if (!snap.qubits.empty()) {
        result.scores["worst_t1_us"] = worst_t1;
        result.scores["worst_t2_us"] = worst_t2;
        result.scores["worst_readout_error"] = worst_readout;
    }
    std::optional<double> worst_gate;
    for (const auto& g : snap.gates) {
        worst_gate = std::max(worst_gate.value_or(0.0), g.error);
    }
    if (worst_gate) {
        result.scores["worst_gate_error"] = *worst_gate;
    }

    std::vector<std::string> failed;
    if (criteria_.min_qubits && snap.num_qubits < *criteria_.min_qubits) {
        failed.emplace_back("min_qubits");
    }
    if (criteria_.min_t1_us && !(worst_t1 >= *criteria_.min_t1_us)) {
        failed.emplace_back("min_t1_us");
    }
    if (criteria_.min_t2_us && !(worst_t2 >= *criteria_.min_t2_us)) {
        failed.emplace_back("min_t2_us");
    }
    if (criteria_.max_readout_error && !(worst_readout <= *criteria_.max_readout_error)) {
        failed.emplace_back("max_readout_error");
    }
    // A gate criterion cannot be confirmed without gate data.
    if (criteria_.max_gate_error && !(worst_gate && *worst_gate <= *criteria_.max_gate_error)) {
        failed.emplace_back("max_gate_error");
    }

    std::string failed_list;
    for (const auto& f : failed) {
        failed_list += (failed_list.empty() ? "" : ",") + f;
    }
    result.passed = failed.empty();
    result.metadata["calibration_taken_at"] = format_rfc3339(snap.taken_at);
    result.metadata["failed_criteria"] = failed_list;
    result.evaluated_at = clock_->now();
    return result;
}

IntrospectionResult ConstantConstraint::evaluate(BackendAdapter&, std::uint64_t) const {
    IntrospectionResult result;
    result.constraint_name = name();
    result.passed = passes_;
    result.evaluated_at = clock_->now();
    return result;
}

AndConstraint::AndConstraint(std::vector<ConstraintPtr> children, Evaluation mode)
    : children_(std::move(children)), mode_(mode) {
    if (children_.empty() || std::any_of(children_.begin(), children_.end(), [](const auto& c) { return !c; })) {
        throw ConstraintError(Code::InvalidArgument, "AND needs at least one non-null child");
    }
}

IntrospectionResult AndConstraint::evaluate(BackendAdapter& adapter, std::uint64_t shots) const {
    IntrospectionResult result;
    result.constraint_name = name();
    result.passed = true;
    for (const auto& child : children_) {
        result.children.push_back(child->evaluate(adapter, shots));
        result.passed = result.passed && result.children.back().passed;
        if (!result.passed && mode_ == Evaluation::ShortCircuit) {
            break;
        }
    }
    result.evaluated_at = oldest(result.children);
    return result;
}

OrConstraint::OrConstraint(std::vector<ConstraintPtr> children, Evaluation mode)
    : children_(std::move(children)), mode_(mode) {
    if (children_.empty() || std::any_of(children_.begin(), children_.end(), [](const auto& c) { return !c; })) {
        throw ConstraintError(Code::InvalidArgument, "OR needs at least one non-null child");
    }
}

IntrospectionResult OrConstraint::evaluate(BackendAdapter& adapter, std::uint64_t shots) const {
    IntrospectionResult result;
    result.constraint_name = name();
    result.passed = false;
    for (const auto& child : children_) {
        result.children.push_back(child->evaluate(adapter, shots));
        result.passed = result.passed || result.children.back().passed;
        if (result.passed && mode_ == Evaluation::ShortCircuit) {
            break;
        }
    }
    result.evaluated_at = oldest(result.children);
    return result;
}

NotConstraint::NotConstraint(ConstraintPtr child) : child_(std::move(child)) {
    if (!child_) {
        throw ConstraintError(Code::InvalidArgument, "NOT needs a child");
    }
}

IntrospectionResult NotConstraint::evaluate(BackendAdapter& adapter, std::uint64_t shots) const {
    IntrospectionResult result;
    result.constraint_name = name();
    result.children.push_back(child_->evaluate(adapter, shots));
    result.passed = !result.children.front().passed;
    result.evaluated_at = result.children.front().evaluated_at;
    return result;
}

FreshWithin::FreshWithin(ConstraintPtr child, std::chrono::microseconds ttl, std::shared_ptr<const Clock> clock)
    : child_(std::move(child)), ttl_(ttl), clock_(std::move(clock)) {
    if (!child_) {
        throw ConstraintError(Code::InvalidArgument, "FreshWithin needs a child");
    }
    if (ttl_ <= std::chrono::microseconds::zero()) {
        throw ConstraintError(Code::InvalidArgument, "FreshWithin ttl must be positive");
    }
}

IntrospectionResult FreshWithin::evaluate(BackendAdapter& adapter, std::uint64_t shots) const {
    std::lock_guard lock(mutex_);
    const auto now = clock_->now();
    const bool hit = cache_ && now - cache_->evaluated_at <= ttl_;
    if (!hit) {
        auto fresh = child_->evaluate(adapter, shots);
        cache_ = std::move(fresh);
    }

    IntrospectionResult result;
    result.constraint_name = name();
    result.passed = cache_->passed;
    result.evaluated_at = cache_->evaluated_at;
    result.scores["ttl_seconds"] = std::chrono::duration<double>(ttl_).count();
    result.metadata["cache"] = hit ? "hit" : "miss";
    result.children.push_back(*cache_);
    return result;
}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

bool is_non_negative_number(const json& v) { return v.is_number() && v.get<double>() >= 0.0; }

void validate_node(const json& doc, const std::string& path, Diagnostics& out) {
    if (!doc.is_object()) {
        out.push_back({path, "constraint must be an object"});
        return;
    }
    const auto type_it = doc.find("type");
    if (type_it == doc.end()) {
        out.push_back({join(path, "type"), "missing constraint type"});
        return;
    }
    if (!type_it->is_string()) {
        out.push_back({join(path, "type"), "constraint type must be a string"});
        return;
    }
    const auto type = type_it->get<std::string>();

    auto check_children = [&](std::optional<std::size_t> exact) {
        const auto it = doc.find("children");
        if (it == doc.end() || !it->is_array()) {
            out.push_back({join(path, "children"), "'" + type + "' requires a children array"});
            return;
        }
        if (exact && it->size() != *exact) {
            out.push_back({join(path, "children"), "'" + type + "' takes exactly " + std::to_string(*exact) + " child"});
        } else if (it->empty()) {
            out.push_back({join(path, "children"), "'" + type + "' needs at least one child"});
        }
        for (std::size_t i = 0; i < it->size(); ++i) {
            validate_node((*it)[i], join(path, "children") + "[" + std::to_string(i) + "]", out);
        }
    };

    if (type == "packed_chsh") {
        const auto it = doc.find("policy");
        const std::string ppath = join(path, "policy");
        if (it == doc.end() || !it->is_object()) {
            out.push_back({ppath, "packed_chsh requires a policy object"});
            return;
        }
        const auto kind = it->find("kind");
        if (kind == it->end() || !kind->is_string() || (*kind != "min" && *kind != "max")) {
            out.push_back({ppath + ".kind", "policy kind must be \"min\" or \"max\""});
        }
        const auto threshold = it->find("threshold");
        if (threshold == it->end() || !threshold->is_number() || !std::isfinite(threshold->get<double>())) {
            out.push_back({ppath + ".threshold", "policy threshold must be a finite number"});
        }
    } else if (type == "calibration") {
        const auto it = doc.find("criteria");
        const std::string cpath = join(path, "criteria");
        if (it == doc.end() || !it->is_object()) {
            out.push_back({cpath, "calibration requires a criteria object"});
            return;
        }
        if (it->empty()) {
            out.push_back({cpath, "at least one criterion is required"});
        }
        for (const auto& [key, v] : it->items()) {
            const std::string kpath = cpath + "." + key;
            if (key == "min_qubits") {
                if (!v.is_number_integer() || v.get<long long>() < 0) {
                    out.push_back({kpath, "must be a non-negative integer"});
                }
            } else if (key == "min_t1_us" || key == "min_t2_us") {
                if (!is_non_negative_number(v)) {
                    out.push_back({kpath, "must be a non-negative number"});
                }
            } else if (key == "max_readout_error" || key == "max_gate_error") {
                if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 1.0) {
                    out.push_back({kpath, "must be a probability in [0, 1]"});
                }
            } else {
                out.push_back({kpath, "unknown criterion '" + key + "'"});
            }
        }
    } else if (type == "and" || type == "or") {
        if (const auto it = doc.find("evaluate_all"); it != doc.end() && !it->is_boolean()) {
            out.push_back({join(path, "evaluate_all"), "must be a boolean"});
        }
        check_children(std::nullopt);
    } else if (type == "not") {
        check_children(1);
    } else if (type == "fresh_within") {
        const auto it = doc.find("ttl_seconds");
        if (it == doc.end() || !it->is_number() || !(it->get<double>() > 0.0) || !std::isfinite(it->get<double>())) {
            out.push_back({join(path, "ttl_seconds"), "fresh_within requires a positive ttl_seconds"});
        }
        check_children(1);
    } else {
        out.push_back({join(path, "type"), "unknown constraint type '" + type + "'"});
    }
}

ConstraintPtr build_node(const json& doc, const std::shared_ptr<const Clock>& clock) {
    const auto type = doc.at("type").get<std::string>();
    auto children = [&] {
        std::vector<ConstraintPtr> out;
        for (const auto& c : doc.at("children")) {
            out.push_back(build_node(c, clock));
        }
        return out;
    };
    if (type == "packed_chsh") {
        const auto& p = doc.at("policy");
        const auto kind = p.at("kind") == "min" ? PolicyKind::MinimumAcceptableValue : PolicyKind::MaximumAcceptableValue;
        return std::make_shared<PackedChshTest>(Policy{kind, p.at("threshold").get<double>()}, MeasurementSettings{},
                                                clock);
    }
    if (type == "calibration") {
        const auto& c = doc.at("criteria");
        CalibrationCriteria criteria;
        if (c.contains("min_qubits")) criteria.min_qubits = c["min_qubits"].get<std::size_t>();
        if (c.contains("min_t1_us")) criteria.min_t1_us = c["min_t1_us"].get<double>();
        if (c.contains("min_t2_us")) criteria.min_t2_us = c["min_t2_us"].get<double>();
        if (c.contains("max_readout_error")) criteria.max_readout_error = c["max_readout_error"].get<double>();
        if (c.contains("max_gate_error")) criteria.max_gate_error = c["max_gate_error"].get<double>();
        return std::make_shared<CalibrationConstraint>(criteria, clock);
    }
    if (type == "and" || type == "or") {
        const auto mode = doc.value("evaluate_all", false) ? Evaluation::All : Evaluation::ShortCircuit;
        if (type == "and") {
            return std::make_shared<AndConstraint>(children(), mode);
        }
        return std::make_shared<OrConstraint>(children(), mode);
    }
    if (type == "not") {
        return std::make_shared<NotConstraint>(children().front());
    }
    const auto ttl = std::chrono::ceil<std::chrono::microseconds>(
        std::chrono::duration<double>(doc.at("ttl_seconds").get<double>()));
    return std::make_shared<FreshWithin>(children().front(), ttl, clock);
}

}  // namespace

Diagnostics validate_constraint_document(const json& doc, const std::string& path) {
    Diagnostics out;
    validate_node(doc, path, out);
    return out;
}

ConstraintPtr build_constraint(const json& doc, std::shared_ptr<const Clock> clock) {
    auto diagnostics = validate_constraint_document(doc);
    if (!diagnostics.empty()) {
        std::string message = "invalid constraint document:";
        for (const auto& d : diagnostics) {
            message += "\n  " + d.path + ": " + d.message;
        }
        throw ConstraintError(Code::InvalidDocument, message, std::move(diagnostics));
    }
    return build_node(doc, clock);
}

}  // namespace resq
