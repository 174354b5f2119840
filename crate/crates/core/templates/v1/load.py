import numpy as np
import pandas as pd

__train_dataset = pd.read_csv("training.csv", delimiter=",")
__test_dataset = pd.read_csv("test.csv", delimiter=",")
