package com.fixture.alpha;

import android.app.Activity;
import android.os.Bundle;
import android.util.Log;

public class MainActivity extends Activity {
    @Override
    protected void onCreate(Bundle savedInstanceState) {
        super.onCreate(savedInstanceState);
        try {
            Session.restore(this);
        } catch (Exception e) {
            Log.d("E", e.toString());
        }
    }
}
