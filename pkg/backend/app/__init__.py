# Bipartite Ramsey coloring toolkit: constructions, verification, exact search and bounds
