# Color energy graphs: construction, pruning, detectors and reservoir extension
