"""
kopcheck - Knowledge-of-Preconditions model checker

Evaluates knowledge, common knowledge and nested knowledge over finite
multi-agent systems in the runs-and-systems framework, decides semantic
predicates (necessary condition, conscious action, locality, stability,
recall, simultaneity, ordering) and verifies the knowledge-of-preconditions
theorems on user-supplied and generated systems.

Modules:
    kernel      - global states, runs, systems, points, does/did
    logic       - formulas, parser, evaluator, Kripke cross-check
    properties  - predicates and theorem checkers
    protocols   - R(P, gamma) generation and the scenario library
    cli         - command-line front end and system documents

Invariants:
    - Systems are immutable after construction
    - Evaluation never consults anything but the system
    - Same input + same seed = identical output
"""

__version__ = "0.1.0.dev0"
