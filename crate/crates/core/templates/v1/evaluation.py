from sklearn import metrics

__score = {METRIC}
print(__score)
print("RESULT:" + repr(float(__score)))
