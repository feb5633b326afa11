#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stormlet/beliefs.hpp"
#include "stormlet/bisimulation.hpp"
#include "stormlet/dot_export.hpp"
#include "stormlet/engines.hpp"
#include "stormlet/exceptions.hpp"
#include "stormlet/lp.hpp"
#include "stormlet/model_json.hpp"
#include "stormlet/model_ops.hpp"
#include "stormlet/orchard.hpp"
#include "stormlet/prism.hpp"
#include "stormlet/properties.hpp"
#include "stormlet/simulate.hpp"

namespace {

using namespace stormlet;

std::string formatValue(double value) {
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    return formatDouble(value, 16);
}

struct EnvFlags {
    std::string method = "vi";
    double precision = 1e-6;
    bool relative = false;
    uint64_t maxIterations = 1000000;

    Environment toEnvironment() const {
        Environment env;
        env.method = methodFromString(method);
        env.precision = precision;
        env.criterion = relative ? Criterion::Relative : Criterion::Absolute;
        env.maxIterations = maxIterations;
        return env;
    }
};

void addEnvFlags(CLI::App* app, EnvFlags& flags) {
    app->add_option("--method", flags.method, "Solution method: vi, gauss-seidel, pi, ovi");
    app->add_option("--precision", flags.precision, "Termination precision (default 1e-6)");
    app->add_flag("--relative", flags.relative, "Use the relative termination criterion");
    app->add_option("--max-iters", flags.maxIterations, "Iteration cap");
}

OrchardConfig parseOrchardFlags(int fruits, int perTree, int raven, bool diagnostic, bool pickedLabels,
                                std::string const& variant) {
    OrchardConfig config;
    config.fruitTypes = orchardFruitNames(fruits);
    config.fruitsPerTree = perTree;
    config.ravenDistance = raven;
    config.diagnosticLabels = diagnostic;
    config.allPickedLabels = pickedLabels;
    if (variant == "mdp") {
        config.variant = OrchardVariant::Mdp;
    } else if (variant.rfind("interval:", 0) == 0) {
        config.variant = OrchardVariant::Interval;
        config.intervalEpsilon = std::stod(variant.substr(9));
    } else if (variant == "parametric") {
        config.variant = OrchardVariant::Parametric;
    } else if (variant == "pomdp") {
        config.variant = OrchardVariant::Pomdp;
    } else if (variant.rfind("pomdp-steal:", 0) == 0) {
        config.variant = OrchardVariant::PomdpSteal;
        config.stealCount = std::stoi(variant.substr(12));
    } else {
        throw ModelError("unknown variant '" + variant +
                         "' (expected mdp, interval:EPS, parametric, pomdp, pomdp-steal:K)");
    }
    return config;
}

int runCli(int argc, char** argv) {
    CLI::App app{"stormlet - a small explicit-state probabilistic model checker"};
    app.require_subcommand(1);

    // orchard
    auto* orchard = app.add_subcommand("orchard", "Generate an Orchard-family model");
    int fruits = 4;
    int perTree = 4;
    int raven = 5;
    bool diagnostic = false;
    bool pickedLabels = false;
    std::string variant = "mdp";
    std::string orchardOut;
    orchard->add_option("--fruits", fruits, "Number of fruit types (default 4)");
    orchard->add_option("--per-tree", perTree, "Fruit per tree (default 4)");
    orchard->add_option("--raven", raven, "Raven distance (default 5)");
    orchard->add_flag("--diagnostic-labels", diagnostic, "Add one per-state diagnostic label");
    orchard->add_flag("--picked-labels", pickedLabels, "Add all<Fruit>Picked labels");
    orchard->add_option("--variant", variant, "mdp | interval:EPS | parametric | pomdp | pomdp-steal:K");
    orchard->add_option("--out", orchardOut, "Output model JSON path");

    // parse-prism
    auto* parsePrismCmd = app.add_subcommand("parse-prism", "Parse and build a PRISM-subset model");
    std::string prismFile;
    std::string constantsText;
    std::string prismOut;
    bool noValuations = false;
    parsePrismCmd->add_option("file", prismFile, "PRISM source file")->required();
    parsePrismCmd->add_option("--const", constantsText, "Constant bindings NAME=VALUE,...");
    parsePrismCmd->add_option("--out", prismOut, "Output model JSON path");
    parsePrismCmd->add_flag("--no-valuations", noValuations, "Skip state valuations");

    // check
    auto* check = app.add_subcommand("check", "Check a property on a model");
    std::string checkModelPath;
    std::string checkProp;
    EnvFlags checkEnv;
    std::string schedulerOut;
    std::string valuesOut;
    check->add_option("model", checkModelPath, "Model JSON path")->required();
    check->add_option("--prop", checkProp, "Property string")->required();
    addEnvFlags(check, checkEnv);
    check->add_option("--scheduler-out", schedulerOut, "Write the extracted scheduler JSON here");
    check->add_option("--values-out", valuesOut, "Write per-state values JSON here");

    // check-interval
    auto* checkInterval = app.add_subcommand("check-interval", "Check an interval MDP");
    std::string intervalModelPath;
    std::string intervalProp;
    std::string intervalMode = "robust";
    EnvFlags intervalEnv;
    checkInterval->add_option("model", intervalModelPath, "Model JSON path")->required();
    checkInterval->add_option("--prop", intervalProp, "Property string")->required();
    checkInterval->add_option("--mode", intervalMode, "robust | cooperative");
    addEnvFlags(checkInterval, intervalEnv);

    // check-pomdp
    auto* checkPomdp = app.add_subcommand("check-pomdp", "Check a POMDP via belief exploration");
    std::string pomdpModelPath;
    std::string pomdpProp;
    std::size_t beliefCap = 1000000;
    EnvFlags pomdpEnv;
    checkPomdp->add_option("model", pomdpModelPath, "Model JSON path")->required();
    checkPomdp->add_option("--prop", pomdpProp, "Property string (Pmax reachability)");
    checkPomdp->add_option("--belief-cap", beliefCap, "Maximum explored beliefs");
    addEnvFlags(checkPomdp, pomdpEnv);

    // bisim
    auto* bisim = app.add_subcommand("bisim", "Strong bisimulation quotient");
    std::string bisimModelPath;
    std::string bisimOut;
    std::string partitionOut;
    std::string keepLabels;
    bool dropRewards = false;
    bisim->add_option("model", bisimModelPath, "Model JSON path")->required();
    bisim->add_option("--keep-labels", keepLabels, "Comma-separated labels to preserve (default: all)");
    bisim->add_flag("--drop-rewards", dropRewards, "Do not preserve reward structures");
    bisim->add_option("--out", bisimOut, "Output quotient model JSON path");
    bisim->add_option("--partition-out", partitionOut, "Write the partition JSON here");

    // export-lp / solve-lp
    auto* exportLpCmd = app.add_subcommand("export-lp", "Export the reachability LP");
    std::string lpModelPath;
    std::string lpGoal;
    std::string lpOut;
    exportLpCmd->add_option("model", lpModelPath, "Model JSON path")->required();
    exportLpCmd->add_option("--goal", lpGoal, "Goal state formula")->required();
    exportLpCmd->add_option("--out", lpOut, "Output LP file path");

    auto* solveLpCmd = app.add_subcommand("solve-lp", "Solve the reachability LP with the built-in simplex");
    std::string lpSolveModelPath;
    std::string lpSolveGoal;
    std::string lpValuesOut;
    solveLpCmd->add_option("model", lpSolveModelPath, "Model JSON path")->required();
    solveLpCmd->add_option("--goal", lpSolveGoal, "Goal state formula")->required();
    solveLpCmd->add_option("--values-out", lpValuesOut, "Write per-state values JSON here");

    // apply-scheduler
    auto* applySched = app.add_subcommand("apply-scheduler", "Apply a scheduler, producing the induced DTMC");
    std::string applyModelPath;
    std::string applySchedulerPath;
    std::string applyOut;
    applySched->add_option("model", applyModelPath, "Model JSON path")->required();
    applySched->add_option("--scheduler", applySchedulerPath, "Scheduler JSON path")->required();
    applySched->add_option("--out", applyOut, "Output model JSON path")->required();

    // simulate
    auto* simulateCmd = app.add_subcommand("simulate", "Generate simulation traces");
    std::string simModelPath;
    std::string simSchedulerPath;
    uint64_t simSeed = 0;
    uint64_t simRuns = 1;
    uint64_t simSteps = 10000;
    std::string simOut;
    simulateCmd->add_option("model", simModelPath, "Model JSON path")->required();
    simulateCmd->add_option("--scheduler", simSchedulerPath, "Scheduler JSON (default: uniform random)");
    simulateCmd->add_option("--seed", simSeed, "RNG seed");
    simulateCmd->add_option("--runs", simRuns, "Number of runs");
    simulateCmd->add_option("--steps", simSteps, "Step cap per run");
    simulateCmd->add_option("--out", simOut, "Trace output path (default: stdout)");

    // export-dot
    auto* exportDotCmd = app.add_subcommand("export-dot", "Export the model as a DOT digraph");
    std::string dotModelPath;
    std::string dotSchedulerPath;
    std::string dotValuesPath;
    std::string dotOut;
    exportDotCmd->add_option("model", dotModelPath, "Model JSON path")->required();
    exportDotCmd->add_option("--scheduler", dotSchedulerPath, "Highlight this scheduler");
    exportDotCmd->add_option("--values", dotValuesPath, "Annotate states with these values");
    exportDotCmd->add_option("--out", dotOut, "Output path (default: stdout)");

    // info
    auto* info = app.add_subcommand("info", "Print the model summary");
    std::string infoModelPath;
    info->add_option("model", infoModelPath, "Model JSON path")->required();

    CLI11_PARSE(app, argc, argv);

    if (*orchard) {
        OrchardConfig config = parseOrchardFlags(fruits, perTree, raven, diagnostic, pickedLabels, variant);
        if (config.variant == OrchardVariant::Parametric) {
            throw UnsupportedError("parametric orchard models have no JSON form; use the library API");
        }
        ExplicitModel model = orchardModel(config);
        std::cout << summary(model) << "\n";
        if (!orchardOut.empty()) {
            writeModelFile(model, orchardOut);
        }
        return 0;
    }
    if (*parsePrismCmd) {
        PrismProgram program = parsePrism(readTextFile(prismFile));
        program = instantiateConstants(program, parseConstantBindings(constantsText));
        PrismBuildOptions options;
        options.buildStateValuations = !noValuations;
        ExplicitModel model = buildFromPrism(program, options);
        std::cout << "Model with " << model.numStates() << " states and " << model.numTransitions()
                  << " transitions\n";
        if (!prismOut.empty()) {
            writeModelFile(model, prismOut);
        }
        return 0;
    }
    if (*check) {
        ExplicitModel model = readModelFile(checkModelPath);
        PropertyAst ast = parseProperty(checkProp);
        bool wantScheduler = !schedulerOut.empty();
        auto outcome = evaluateProperty(model, ast, checkEnv.toEnvironment(), wantScheduler);
        std::size_t initial = model.firstInitialState();
        if (outcome.satisfaction) {
            std::cout << "Result: " << (outcome.satisfaction->get(initial) ? "true" : "false") << "\n";
        } else {
            std::cout << "Result: " << formatValue(outcome.result.values[initial]) << "\n";
        }
        if (wantScheduler) {
            if (!outcome.result.scheduler) {
                throw UnsupportedError("no scheduler available for this property");
            }
            writeSchedulerFile(*outcome.result.scheduler, schedulerOut);
        }
        if (!valuesOut.empty()) {
            writeTextFile(valuesOut, writeValuesJson(outcome.result.values));
        }
        return 0;
    }
    if (*checkInterval) {
        ExplicitModel model = readModelFile(intervalModelPath);
        PropertyAst ast = parseProperty(intervalProp);
        if (ast.op != PropertyOperator::Probability || ast.pathBound || ast.bound) {
            throw UnsupportedError("interval checking supports plain Pmax/Pmin reachability only");
        }
        if (ast.direction == OptDirection::None) {
            throw UnsupportedError("interval checking needs a direction (Pmax or Pmin)");
        }
        UncertaintyMode mode;
        if (intervalMode == "robust") {
            mode = UncertaintyMode::Robust;
        } else if (intervalMode == "cooperative") {
            mode = UncertaintyMode::Cooperative;
        } else {
            throw ModelError("unknown mode '" + intervalMode + "' (expected robust or cooperative)");
        }
        BitVector goal = evaluateStateFormula(model, *ast.goal);
        Direction direction = ast.direction == OptDirection::Max ? Direction::Max : Direction::Min;
        auto result = checkIntervalReachability(model, goal, direction, mode, intervalEnv.toEnvironment());
        std::cout << "Result: " << formatValue(result.values[model.firstInitialState()]) << "\n";
        return 0;
    }
    if (*checkPomdp) {
        ExplicitModel model = readModelFile(pomdpModelPath);
        std::string propText = pomdpProp.empty() ? "Pmax=? [F \"PlayersWon\"]" : pomdpProp;
        PropertyAst ast = parseProperty(propText);
        if (ast.op != PropertyOperator::Probability || ast.direction != OptDirection::Max || ast.pathBound ||
            ast.bound) {
            throw UnsupportedError("pomdp checking supports Pmax reachability only");
        }
        if (ast.goal->kind != StateFormula::Kind::Label) {
            throw UnsupportedError("pomdp checking expects a single goal label");
        }
        auto result = checkPomdpReachability(model, ast.goal->label, pomdpEnv.toEnvironment(), beliefCap);
        std::cout << "Result in [" << formatValue(result.lowerBound) << ", " << formatValue(result.upperBound)
                  << "]\n";
        if (!result.converged) {
            std::cout << "note: belief cap reached before the bounds closed\n";
        }
        return 0;
    }
    if (*bisim) {
        ExplicitModel model = readModelFile(bisimModelPath);
        BisimulationOptions options;
        options.preserveRewards = !dropRewards;
        if (!keepLabels.empty()) {
            std::size_t position = 0;
            while (position <= keepLabels.size()) {
                std::size_t comma = keepLabels.find(',', position);
                std::string name = keepLabels.substr(
                    position, comma == std::string::npos ? std::string::npos : comma - position);
                if (!name.empty()) {
                    options.preservedLabels.push_back(name);
                }
                if (comma == std::string::npos) {
                    break;
                }
                position = comma + 1;
            }
        }
        auto [quotient, partition] = bisimulationQuotient(model, options);
        std::cout << "Model with " << quotient.numStates() << " states and " << quotient.numTransitions()
                  << " transitions\n";
        if (!bisimOut.empty()) {
            writeModelFile(quotient, bisimOut);
        }
        if (!partitionOut.empty()) {
            writeTextFile(partitionOut, writePartitionJson(partition));
        }
        return 0;
    }
    if (*exportLpCmd) {
        ExplicitModel model = readModelFile(lpModelPath);
        PropertyAst goalAst = parseProperty(lpGoal);
        BitVector goal = evaluateStateFormula(model, *goalAst.goal);
        LpProblem problem = encodeReachabilityLp(model, goal);
        std::string text = exportLp(problem);
        if (lpOut.empty()) {
            std::cout << text;
        } else {
            writeTextFile(lpOut, text);
        }
        return 0;
    }
    if (*solveLpCmd) {
        ExplicitModel model = readModelFile(lpSolveModelPath);
        PropertyAst goalAst = parseProperty(lpSolveGoal);
        BitVector goal = evaluateStateFormula(model, *goalAst.goal);
        LpProblem problem = encodeReachabilityLp(model, goal);
        std::vector<double> values = solveLp(problem);
        std::cout << "Result: " << formatValue(values[model.firstInitialState()]) << "\n";
        if (!lpValuesOut.empty()) {
            writeTextFile(lpValuesOut, writeValuesJson(values));
        }
        return 0;
    }
    if (*applySched) {
        ExplicitModel model = readModelFile(applyModelPath);
        Scheduler scheduler = readSchedulerFile(applySchedulerPath);
        ExplicitModel induced = applyScheduler(model, scheduler);
        std::cout << summary(induced) << "\n";
        writeModelFile(induced, applyOut);
        return 0;
    }
    if (*simulateCmd) {
        ExplicitModel model = readModelFile(simModelPath);
        std::optional<Scheduler> scheduler;
        if (!simSchedulerPath.empty()) {
            scheduler = readSchedulerFile(simSchedulerPath);
        }
        SimulationOptions options;
        options.seed = simSeed;
        options.runs = simRuns;
        options.maxSteps = simSteps;
        auto traces = simulate(model, scheduler ? &*scheduler : nullptr, options);
        std::string text = writeTracesJson(traces);
        if (simOut.empty()) {
            std::cout << text;
        } else {
            writeTextFile(simOut, text);
        }
        return 0;
    }
    if (*exportDotCmd) {
        ExplicitModel model = readModelFile(dotModelPath);
        std::optional<Scheduler> scheduler;
        if (!dotSchedulerPath.empty()) {
            scheduler = readSchedulerFile(dotSchedulerPath);
        }
        std::optional<CheckResult> result;
        if (!dotValuesPath.empty()) {
            CheckResult loaded;
            loaded.values = readValuesJson(readTextFile(dotValuesPath));
            result = std::move(loaded);
        }
        std::string text = exportDot(model, result ? &*result : nullptr, scheduler ? &*scheduler : nullptr);
        if (dotOut.empty()) {
            std::cout << text;
        } else {
            writeTextFile(dotOut, text);
        }
        return 0;
    }
    if (*info) {
        ExplicitModel model = readModelFile(infoModelPath);
        std::cout << summary(model) << "\n";
        auto violations = validate(model);
        for (auto const& violation : violations) {
            std::cout << "violation: " << violation << "\n";
        }
        return violations.empty() ? 0 : 2;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return runCli(argc, argv);
    } catch (UnsupportedError const& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 3;
    } catch (ConvergenceError const& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 3;
    } catch (ParseError const& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 2;
    } catch (ModelError const& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 2;
    } catch (IoError const& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 2;
    } catch (std::exception const& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
}
