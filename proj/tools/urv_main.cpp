// Command-line surface for the URV refinement library: refine, check, svd,
// rrurv and verify subcommands over CSV / MatrixMarket inputs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "urv/matrix_io.hpp"
#include "urv/monitors.hpp"
#include "urv/preconditions.hpp"
#include "urv/refine.hpp"
#include "urv/svd.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitIterationLimit = 2;
constexpr int kExitVerifyFailed = 3;
constexpr int kExitUsage = 64;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonArgs {
    std::string input;
    std::string format = "auto";
};

urv::MatrixFormat toFormat(const std::string& name)
{
    if (name == "matrixmarket") {
        return urv::MatrixFormat::MatrixMarket;
    }
    if (name == "csv") {
        return urv::MatrixFormat::Csv;
    }
    return urv::MatrixFormat::Auto;
}

urv::Matrix loadSquare(const CommonArgs& args)
{
    urv::Matrix m = [&] {
        try {
            return urv::parseMatrix(std::filesystem::path(args.input), toFormat(args.format));
        } catch (const urv::ParseError& e) {
            throw InputError(args.input + ": " + e.what());
        }
    }();
    if (m.rows() != m.cols()) {
        throw InputError(args.input + ": matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", a square matrix is required");
    }
    return m;
}

urv::UpperTriangular<double> loadTriangular(const CommonArgs& args)
{
    urv::Matrix m = loadSquare(args);
    if (auto bad = urv::firstLowerViolation(m)) {
        throw InputError("input is not upper triangular: entry (" +
                         std::to_string(bad->first + 1) + ", " + std::to_string(bad->second + 1) +
                         ") = " + urv::formatDouble(m(bad->first, bad->second)) + " is nonzero");
    }
    return urv::UpperTriangular<double>(std::move(m));
}

std::string human(double value)
{
    return urv::formatDouble(value, 15);
}

const char* yesNo(bool b)
{
    return b ? "yes" : "no";
}

void addCommonOptions(CLI::App* cmd, CommonArgs& args)
{
    cmd->add_option("--input", args.input, "matrix file (CSV or MatrixMarket array)")
        ->required();
    cmd->add_option("--format", args.format, "input format")
        ->check(CLI::IsMember({"auto", "matrixmarket", "csv"}))
        ->capture_default_str();
}

int runRefine(const CommonArgs& common, const urv::RefineOptions<double>& opts,
              const std::string& tracePath, bool asJson)
{
    const auto r0 = loadTriangular(common);
    const auto report = urv::refine(r0, opts);

    if (!tracePath.empty()) {
        std::ofstream trace(tracePath);
        if (!trace) {
            throw InputError("cannot open trace file '" + tracePath + "'");
        }
        urv::writeTrace(trace, report.finalState.history());
        trace.flush();
    }

    if (asJson) {
        nlohmann::json j;
        j["converged"] = report.converged;
        j["double_sweeps"] = report.doubleSweeps;
        j["final_e"] = report.finalE;
        j["final_h_norm"] = report.finalState.history().back().hNorm;
        j["initial_corner_flipped"] = report.finalState.initialCornerFlipped();
        j["n"] = report.finalState.order();
        j["reason"] = urv::to_string(report.reason);
        std::cout << j.dump() << '\n';
    } else {
        std::cout << "final_e: " << human(report.finalE) << '\n'
                  << "double_sweeps: " << report.doubleSweeps << '\n'
                  << "reason: " << urv::to_string(report.reason) << '\n'
                  << "converged: " << yesNo(report.converged) << '\n';
    }
    return report.reason == urv::StopReason::MaxIter ? kExitIterationLimit : kExitOk;
}

int runCheck(const CommonArgs& common, bool asJson)
{
    const auto r0 = loadTriangular(common);
    const auto report = urv::checkPreconditions(r0);

    if (asJson) {
        nlohmann::json j;
        j["e0"] = report.e0;
        j["rho0"] = report.rho0;
        j["sigma_min_S"] = report.sigmaMinS;
        j["sigma_min_R"] = report.sigmaMinR;
        j["sigma_next_R"] = report.sigmaNextR;
        j["sigma_max_R"] = report.sigmaMaxR;
        j["v_nn"] = report.vnn;
        j["v_nn_zero_threshold"] = report.vnnZeroThreshold;
        j["rho_lt_one"] = report.rhoLtOne;
        j["vnn_nonzero"] = report.vnnNonzero;
        j["sigma_gap_simple"] = report.sigmaGapSimple;
        j["smin_S_gt_smin_R"] = report.sminSGtSminR;
        j["verdict"] = urv::to_string(report.verdict);
        std::cout << j.dump() << '\n';
    } else {
        std::cout << "e0: " << human(report.e0) << '\n'
                  << "rho0: " << human(report.rho0) << '\n'
                  << "sigma_min_S: " << human(report.sigmaMinS) << '\n'
                  << "sigma_min_R: " << human(report.sigmaMinR) << '\n'
                  << "v_nn: " << human(report.vnn) << '\n'
                  << "v_nn_zero_threshold: " << human(report.vnnZeroThreshold) << '\n'
                  << "rho_lt_one: " << yesNo(report.rhoLtOne) << '\n'
                  << "vnn_nonzero: " << yesNo(report.vnnNonzero) << '\n'
                  << "sigma_gap_simple: " << yesNo(report.sigmaGapSimple) << '\n'
                  << "smin_S_gt_smin_R: " << yesNo(report.sminSGtSminR) << '\n'
                  << "verdict: " << urv::to_string(report.verdict) << '\n';
    }
    return kExitOk;
}

int runSvd(const CommonArgs& common, bool asJson)
{
    const urv::Matrix m = loadSquare(common);
    const auto result = urv::svd(m);

    if (asJson) {
        nlohmann::json j;
        j["sigma"] = std::vector<double>(result.sigma.data(),
                                         result.sigma.data() + result.sigma.size());
        auto toRows = [](const urv::Matrix& x) {
            std::vector<std::vector<double>> rows;
            for (urv::Index i = 0; i < x.rows(); ++i) {
                rows.emplace_back(x.row(i).begin(), x.row(i).end());
            }
            return rows;
        };
        j["u"] = toRows(result.u);
        j["v"] = toRows(result.v);
        std::cout << j.dump() << '\n';
    } else {
        std::cout << "sigma = ";
        for (urv::Index i = 0; i < result.sigma.size(); ++i) {
            std::cout << (i ? "," : "") << human(result.sigma(i));
        }
        std::cout << '\n';
    }
    return kExitOk;
}

int runRankRevealing(const CommonArgs& common, double rankTol,
                     const urv::RefineOptions<double>& opts, bool asJson)
{
    const auto r0 = loadTriangular(common);
    const auto result = urv::rankRevealingUrv(r0, rankTol, opts);

    if (asJson) {
        nlohmann::json j;
        j["numerical_rank"] = result.numericalRank;
        j["all_levels_converged"] = result.allLevelsConverged;
        j["diag"] = std::vector<double>(result.r.diagonal().begin(), result.r.diagonal().end());
        std::cout << j.dump() << '\n';
    } else {
        std::cout << "numerical_rank: " << result.numericalRank << '\n'
                  << "all_levels_converged: " << yesNo(result.allLevelsConverged) << '\n'
                  << "diag = ";
        for (urv::Index i = 0; i < result.r.rows(); ++i) {
            std::cout << (i ? "," : "") << human(result.r(i, i));
        }
        std::cout << '\n';
    }
    return result.allLevelsConverged ? kExitOk : kExitIterationLimit;
}

int runVerify(const CommonArgs& common, const urv::RefineOptions<double>& opts, bool asJson)
{
    auto r0 = loadTriangular(common);
    urv::RefineOptions<double> verifyOpts = opts;
    verifyOpts.accumulateFactors = true;
    const auto report = urv::refine(r0, verifyOpts);
    const auto svd0 = urv::svd(report.finalState.initial());
    const auto monitors = urv::runMonitors(report.finalState, svd0);

    if (asJson) {
        nlohmann::json j;
        j["converged"] = report.converged;
        j["double_sweeps"] = report.doubleSweeps;
        j["final_e"] = report.finalE;
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& entry : monitors.entries) {
            nlohmann::json c;
            c["check"] = urv::to_string(entry.id);
            c["applicable"] = entry.applicable;
            c["holds"] = entry.holds;
            c["worst_violation"] = entry.worstViolation;
            c["location"] = entry.location;
            checks.push_back(c);
        }
        j["checks"] = checks;
        j["all_checks_pass"] = monitors.allApplicableHold();
        std::cout << j.dump() << '\n';
    } else {
        for (const auto& entry : monitors.entries) {
            std::cout << urv::to_string(entry.id) << ": ";
            if (!entry.applicable) {
                std::cout << "NOT_APPLICABLE\n";
            } else if (entry.holds) {
                std::cout << "PASS (worst " << urv::formatDouble(entry.worstViolation, 3)
                          << " at l=" << entry.location << ")\n";
            } else {
                std::cout << "FAIL (worst " << urv::formatDouble(entry.worstViolation, 3)
                          << " at l=" << entry.location << ")\n";
            }
        }
        std::cout << "result: "
                  << (monitors.allApplicableHold() ? "ALL_CHECKS_PASS" : "CHECKS_FAILED") << '\n';
    }
    if (report.reason == urv::StopReason::MaxIter) {
        return kExitIterationLimit;
    }
    return monitors.allApplicableHold() ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"URV refinement: smallest-singular-value estimation for upper "
                 "triangular matrices via alternating Givens sweeps"};
    app.require_subcommand(1);

    CommonArgs refineArgs;
    urv::RefineOptions<double> refineOpts;
    std::string tracePath;
    bool refineJson = false;
    bool noFactors = false;
    auto* refineCmd = app.add_subcommand("refine", "run the refinement iteration");
    addCommonOptions(refineCmd, refineArgs);
    refineCmd->add_option("--tol-h", refineOpts.tolH,
                          "coupling-norm tolerance, relative to ||R0||_F")
        ->capture_default_str();
    refineCmd->add_option("--tol-e", refineOpts.tolEStagnation,
                          "corner stagnation tolerance, relative")
        ->capture_default_str();
    refineCmd->add_option("--max-iter", refineOpts.maxDoubleSweeps, "maximum double sweeps")
        ->capture_default_str();
    refineCmd->add_option("--trace", tracePath, "write a JSON-lines trace, one line per half-sweep");
    refineCmd->add_flag("--rho", refineOpts.recordRho,
                        "record rho = e / sigma_min(S) per half-sweep (costs an oracle SVD each)");
    refineCmd->add_flag("--no-factors", noFactors, "skip orthogonal factor accumulation");
    refineCmd->add_flag("--json", refineJson, "machine-readable report on stdout");

    CommonArgs checkArgs;
    bool checkJson = false;
    auto* checkCmd = app.add_subcommand("check", "diagnose convergence preconditions");
    addCommonOptions(checkCmd, checkArgs);
    checkCmd->add_flag("--json", checkJson, "machine-readable report on stdout");

    CommonArgs svdArgs;
    bool svdJson = false;
    auto* svdCmd = app.add_subcommand("svd", "oracle singular value decomposition");
    addCommonOptions(svdCmd, svdArgs);
    svdCmd->add_flag("--json", svdJson, "emit sigma, U and V as JSON");

    CommonArgs rrurvArgs;
    urv::RefineOptions<double> rrurvOpts;
    double rankTol = 1e-8;
    bool rrurvJson = false;
    auto* rrurvCmd = app.add_subcommand("rrurv", "rank revealing URV by refine-and-deflate");
    addCommonOptions(rrurvCmd, rrurvArgs);
    rrurvCmd->add_option("--rank-tol", rankTol, "rank threshold relative to the sigma_1 proxy")
        ->capture_default_str();
    rrurvCmd->add_option("--max-iter", rrurvOpts.maxDoubleSweeps,
                         "maximum double sweeps per deflation level")
        ->capture_default_str();
    rrurvCmd->add_flag("--json", rrurvJson, "machine-readable report on stdout");

    CommonArgs verifyArgs;
    urv::RefineOptions<double> verifyOpts;
    bool verifyJson = false;
    auto* verifyCmd =
        app.add_subcommand("verify", "refine, then evaluate every monitored lemma/theorem");
    addCommonOptions(verifyCmd, verifyArgs);
    verifyCmd->add_option("--tol-h", verifyOpts.tolH, "coupling-norm tolerance")
        ->capture_default_str();
    verifyCmd->add_option("--tol-e", verifyOpts.tolEStagnation, "corner stagnation tolerance")
        ->capture_default_str();
    verifyCmd->add_option("--max-iter", verifyOpts.maxDoubleSweeps, "maximum double sweeps")
        ->capture_default_str();
    verifyCmd->add_flag("--json", verifyJson, "machine-readable report on stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n' << app.help() << '\n';
        return kExitUsage;
    }

    try {
        if (refineCmd->parsed()) {
            refineOpts.accumulateFactors = !noFactors;
            return runRefine(refineArgs, refineOpts, tracePath, refineJson);
        }
        if (checkCmd->parsed()) {
            return runCheck(checkArgs, checkJson);
        }
        if (svdCmd->parsed()) {
            return runSvd(svdArgs, svdJson);
        }
        if (rrurvCmd->parsed()) {
            return runRankRevealing(rrurvArgs, rankTol, rrurvOpts, rrurvJson);
        }
        if (verifyCmd->parsed()) {
            return runVerify(verifyArgs, verifyOpts, verifyJson);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    return kExitUsage;
}
