get_detectors_description = "Registered detectors and whether a trained checkpoint is available"
predict_description = (
    "Scores one uploaded face image with the latest checkpoint of the detector. "
    "A score at or above the threshold predicts fake"
)
