from src.multi_elicit.cli import main

# ============================================================================
# MULTI-ELICIT - entry point
# ============================================================================
# Examples:
#   python app.py verify --loss variance2 --property variance --outcomes 0,1,2,3 --grid 20
#   python app.py witness --property variance --m 1 --r1 0.16 --r2 0.21 --outcomes 0,1
#   python app.py frontier --property knorm2 --max-d 2 --max-m 3 --outcomes 0,1,2
#   python app.py voronoi --bands variance --thresholds 0.3,0.6 --outcomes 0,1,2 --grid 10
#   python app.py regress --a 10 --n 10000 --trials 400 --jobs 4
#   python app.py catalog
#
# Solver knobs live in config.yaml (or a file passed with --config).
# ============================================================================

if __name__ == "__main__":
    import sys
    sys.exit(main())
